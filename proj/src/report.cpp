#include "vertexkit/report.hpp"

#include <algorithm>
#include <sstream>

namespace vertexkit {

namespace {
constexpr std::size_t kMaxWitnesses = 5;
}

CheckItem& Report::item(const std::string& name) {
    for (auto& it : items_)
        if (it.name == name) return it;
    CheckItem c;
    c.name = name;
    items_.push_back(c);
    return items_.back();
}

void Report::record(const std::string& name, bool ok, const std::string& where) {
    CheckItem& it = item(name);
    ++it.checked;
    if (ok) return;
    it.pass = false;
    if (it.failures.size() < kMaxWitnesses) it.failures.push_back(where);
}

void Report::skip(const std::string& name) { ++item(name).skipped; }

void Report::merge(const Report& other, const std::string& prefix) {
    for (const auto& o : other.items_) {
        CheckItem& it = item(prefix + o.name);
        it.pass = it.pass && o.pass;
        it.checked += o.checked;
        it.skipped += o.skipped;
        for (const auto& f : o.failures)
            if (it.failures.size() < kMaxWitnesses) it.failures.push_back(f);
    }
}

bool Report::ok() const {
    return std::all_of(items_.begin(), items_.end(), [](const CheckItem& i) { return i.pass; });
}

const CheckItem* Report::find(const std::string& name) const {
    for (const auto& it : items_)
        if (it.name == name) return &it;
    return nullptr;
}

bool Report::passed(const std::string& name) const {
    const CheckItem* it = find(name);
    return it && it->pass;
}

std::string Report::format() const {
    std::ostringstream os;
    for (const auto& it : items_) {
        os << (it.pass ? "PASS " : "FAIL ") << it.name << " (" << it.checked << " checked";
        if (it.skipped) os << ", " << it.skipped << " outside window";
        os << ")\n";
        for (const auto& f : it.failures) os << "  at " << f << "\n";
    }
    return os.str();
}

}  // namespace vertexkit
