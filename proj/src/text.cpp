#include "vertexkit/text.hpp"

#include "vertexkit/errors.hpp"

#include <charconv>

namespace vertexkit::text {

std::string trim(std::string_view s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string_view::npos) return {};
    auto b = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split_sum(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    char prev = 0;  // last non-space character
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (depth < 0) fail("ParseError", "unbalanced ')' in '" + std::string(s) + "'");
        if ((c == '+' || c == '-') && depth == 0 && prev != 0 && prev != '^' && prev != '*' &&
            prev != '/' && prev != '(') {
            auto t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
            if (c == '-') cur.push_back('-');
        } else {
            if (!(c == '+' && depth == 0 && prev == 0)) cur.push_back(c);
        }
        if (c != ' ' && c != '\t') prev = c;
    }
    if (depth != 0) fail("ParseError", "unbalanced '(' in '" + std::string(s) + "'");
    auto t = trim(cur);
    if (t == "-") fail("ParseError", "dangling sign in '" + std::string(s) + "'");
    if (!t.empty()) out.push_back(t);
    return out;
}

std::vector<std::string> split_product(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == '*' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    for (auto& p : out)
        if (p.empty()) fail("ParseError", "empty factor in '" + std::string(s) + "'");
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

bool parse_int(std::string_view s, long& out) {
    auto t = trim(s);
    if (!t.empty() && t[0] == '+') t.erase(0, 1);
    if (t.empty()) return false;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return ec == std::errc() && p == t.data() + t.size();
}

}  // namespace vertexkit::text
