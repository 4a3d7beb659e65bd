#pragma once

#include <stdexcept>
#include <string>

namespace vertexkit {

// Every library failure carries a stable kind tag so callers (and the CLI) can
// branch on it without string matching.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), message_(what) {}
    const std::string& kind() const noexcept { return kind_; }
    const std::string& message() const noexcept { return message_; }  // what() without the kind

private:
    std::string kind_;
    std::string message_;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace vertexkit
