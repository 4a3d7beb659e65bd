#include "vertexkit/errors.hpp"
#include "vertexkit/series.hpp"
#include "vertexkit/text.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

namespace vertexkit {

namespace {

int total_degree(const Key& k) {
    int d = 0;
    for (int e : k) d += e;
    return d;
}

std::string monomial_text(const LocalizedSeries& s, const Key& k) {
    std::vector<std::string> parts;
    for (int i = 0; i < s.nvars(); ++i) {
        if (k[i] == 0) continue;
        parts.push_back(k[i] == 1 ? s.vars()[i] : s.vars()[i] + "^" + std::to_string(k[i]));
    }
    for (int p = 0; p < s.npairs(); ++p) {
        int e = k[s.nvars() + p];
        if (e == 0) continue;
        auto [a, b] = s.pair_names(p);
        parts.push_back("(" + a + "-" + b + ")^" + std::to_string(e));
    }
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : "*") + p;
    return out;
}

}  // namespace

std::string format_terms(const LocalizedSeries& s) {
    std::vector<const std::pair<const Key, Vec>*> order;
    for (const auto& kv : s.terms()) order.push_back(&kv);
    const int n = s.nvars();
    std::sort(order.begin(), order.end(), [&](auto* a, auto* b) {
        int da = total_degree(a->first), db = total_degree(b->first);
        if (da != db) return da < db;
        for (int i = 0; i < n; ++i)
            if (a->first[i] != b->first[i]) return a->first[i] > b->first[i];
        for (std::size_t i = n; i < a->first.size(); ++i)
            if (a->first[i] != b->first[i]) return a->first[i] > b->first[i];
        return false;
    });
    std::ostringstream os;
    bool first = true;
    const bool scalar = s.module().is_scalar();
    for (auto* kv : order) {
        std::string mono = monomial_text(s, kv->first);
        for (const auto& [bi, c] : kv->second.entries()) {
            if (!first) os << (c < 0 ? " - " : " + ");
            else if (c < 0) os << "-";
            first = false;
            Q a = abs(c);
            std::vector<std::string> f;
            if (a != 1 || (scalar && mono.empty())) f.push_back(a.get_str());
            if (!scalar) f.push_back(s.module().basis_name(bi));
            if (!mono.empty()) f.push_back(mono);
            for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "*" : "") << f[i];
        }
    }
    if (first) return "0";
    return os.str();
}

std::string format_window(const LocalizedSeries& s) {
    Window w = s.window();
    std::ostringstream os;
    os << "window ceiling=" << (w.ceiling ? std::to_string(*w.ceiling) : std::string("none"));
    os << " floors={";
    bool first = true;
    for (const auto& v : s.vars()) {
        auto it = w.floors.find(v);
        if (it == w.floors.end()) continue;
        os << (first ? "" : ",") << v << ":" << it->second;
        first = false;
    }
    os << "} diffs={";
    first = true;
    for (int p = 0; p < s.npairs(); ++p) {
        auto it = w.diff_floors.find(s.pair_names(p));
        if (it == w.diff_floors.end()) continue;
        os << (first ? "" : ",") << "(" << it->first.first << "," << it->first.second << "):" << it->second;
        first = false;
    }
    os << "}";
    if (!w.bounds.empty()) {
        os << " bounds={";
        first = true;
        for (const auto& b : w.bounds) {
            os << (first ? "" : ",") << "[";
            for (std::size_t i = 0; i < b.vars.size(); ++i) os << (i ? "," : "") << b.vars[i];
            os << "]:" << b.ceiling;
            first = false;
        }
        os << "}";
    }
    return os.str();
}

std::string format_series(const LocalizedSeries& s) { return format_window(s) + "\n" + format_terms(s); }

namespace {

struct ParsedFactor {
    enum Kind { Coef, Basis, Var, Diff } kind;
    Q coef;
    int basis = -1;
    std::string a, b;
    long exp = 1;
};

bool is_name(const std::string& s) {
    if (s.empty() || !(std::isalpha((unsigned char)s[0]) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum((unsigned char)c) || c == '_')) return false;
    return true;
}

long parse_exponent(const std::string& s) {
    std::string t = text::trim(s);
    if (t.size() >= 2 && t.front() == '(' && t.back() == ')') t = t.substr(1, t.size() - 2);
    long e;
    if (!text::parse_int(t, e)) fail("ParseError", "bad exponent '" + s + "'");
    return e;
}

ParsedFactor parse_factor(const std::string& f, const GModule& m) {
    ParsedFactor pf{};
    if (m.index_of(f) >= 0 && !m.is_scalar()) {
        pf.kind = ParsedFactor::Basis;
        pf.basis = m.index_of(f);
        return pf;
    }
    if (f[0] == '(') {
        auto close = f.find(')');
        if (close == std::string::npos) fail("ParseError", "unbalanced factor '" + f + "'");
        std::string inner = f.substr(1, close - 1);
        auto minus = inner.find('-');
        if (minus == std::string::npos) fail("ParseError", "expected (x-y) in '" + f + "'");
        pf.kind = ParsedFactor::Diff;
        pf.a = text::trim(inner.substr(0, minus));
        pf.b = text::trim(inner.substr(minus + 1));
        if (!is_name(pf.a) || !is_name(pf.b)) fail("ParseError", "bad difference factor '" + f + "'");
        std::string rest = text::trim(f.substr(close + 1));
        if (!rest.empty()) {
            if (rest[0] != '^') fail("ParseError", "bad difference factor '" + f + "'");
            pf.exp = parse_exponent(rest.substr(1));
        }
        return pf;
    }
    if (std::isdigit((unsigned char)f[0])) {
        pf.kind = ParsedFactor::Coef;
        pf.coef = parse_rational(f);
        return pf;
    }
    auto caret = f.find('^');
    std::string name = text::trim(f.substr(0, caret));
    if (!is_name(name)) fail("ParseError", "bad factor '" + f + "'");
    pf.kind = ParsedFactor::Var;
    pf.a = name;
    if (caret != std::string::npos) pf.exp = parse_exponent(f.substr(caret + 1));
    return pf;
}

// x2 < x10 < y
bool natural_less(const std::string& a, const std::string& b) {
    auto cut = [](const std::string& s) {
        size_t i = s.size();
        while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) --i;
        return i;
    };
    size_t ia = cut(a), ib = cut(b);
    std::string pa = a.substr(0, ia), pb = b.substr(0, ib);
    if (pa != pb) return pa < pb;
    if (a.size() - ia != b.size() - ib) return a.size() - ia < b.size() - ib;
    return a < b;
}

}  // namespace

LocalizedSeries parse_series(const std::string& input, ModulePtr m, std::vector<std::string> vars) {
    std::string textv = text::trim(input);
    std::string header;
    if (textv.rfind("window", 0) == 0) {
        auto nl = textv.find('\n');
        header = textv.substr(0, nl);
        textv = nl == std::string::npos ? std::string() : text::trim(textv.substr(nl + 1));
    }
    const bool discover = vars.empty();
    std::vector<std::pair<std::vector<ParsedFactor>, Q>> terms;
    std::vector<std::pair<std::string, std::string>> pairs;
    auto note_var = [&](const std::string& v) {
        if (std::find(vars.begin(), vars.end(), v) != vars.end()) return;
        if (!discover) fail("UnknownVariable", v);
        vars.push_back(v);
    };
    if (!textv.empty() && textv != "0") {
        for (auto t : text::split_sum(textv)) {
            Q sign(1);
            if (t[0] == '-') {
                sign = -1;
                t = text::trim(t.substr(1));
            }
            std::vector<ParsedFactor> fs;
            for (const auto& f : text::split_product(t)) {
                auto pf = parse_factor(f, *m);
                if (pf.kind == ParsedFactor::Var) note_var(pf.a);
                if (pf.kind == ParsedFactor::Diff) {
                    note_var(pf.a);
                    note_var(pf.b);
                    if (pf.a == pf.b) fail("ParseError", "degenerate difference in '" + f + "'");
                    pairs.push_back({pf.a, pf.b});
                }
                fs.push_back(pf);
            }
            terms.push_back({fs, sign});
        }
    }
    // Header may name variables or pairs with no terms.
    std::regex pair_re(R"(\((\w+),(\w+)\))");
    for (auto it = std::sregex_iterator(header.begin(), header.end(), pair_re); it != std::sregex_iterator(); ++it) {
        note_var((*it)[1]);
        note_var((*it)[2]);
        pairs.push_back({(*it)[1], (*it)[2]});
    }
    if (discover) std::sort(vars.begin(), vars.end(), natural_less);
    LocalizedSeries s(m, vars, {});
    // Pairs are oriented by variable order.
    std::vector<std::pair<std::string, std::string>> oriented;
    for (auto [a, b] : pairs) {
        if (s.var_index(a) > s.var_index(b)) std::swap(a, b);
        oriented.push_back({a, b});
    }
    s = LocalizedSeries(m, vars, oriented);
    if (!header.empty()) parse_window_into(s, header);
    for (const auto& [fs, sign] : terms) {
        Q coef = sign;
        int basis = -1;
        Key k = s.zero_key();
        for (const auto& f : fs) {
            switch (f.kind) {
                case ParsedFactor::Coef: coef *= f.coef; break;
                case ParsedFactor::Basis:
                    if (basis >= 0) fail("ParseError", "two basis factors in one term");
                    basis = f.basis;
                    break;
                case ParsedFactor::Var: k[s.var_index(f.a)] += int(f.exp); break;
                case ParsedFactor::Diff: {
                    int sg = 1;
                    int p = s.pair_index(f.a, f.b, &sg);
                    if (sg < 0 && (f.exp % 2)) coef = -coef;
                    k[s.nvars() + p] += int(f.exp);
                    break;
                }
            }
        }
        if (basis < 0) {
            if (m->dim() != 1) fail("ParseError", "term without a basis vector");
            basis = 0;
        }
        s.add_term(k, Vec::unit(basis, coef));
    }
    s.reduce();
    return s;
}

void parse_window_into(LocalizedSeries& s, const std::string& header) {
    Window w;
    std::smatch m;
    std::regex ceil_re(R"(ceiling=(-?\d+|none|inf))");
    if (std::regex_search(header, m, ceil_re)) {
        if (m[1] != "none" && m[1] != "inf") w.ceiling = std::stoi(m[1]);
    }
    auto section = [&](const std::string& name) -> std::string {
        auto pos = header.find(name + "={");
        if (pos == std::string::npos) return {};
        int depth = 0;
        std::size_t start = pos + name.size() + 2;
        for (std::size_t i = start - 1; i < header.size(); ++i) {
            if (header[i] == '{') ++depth;
            if (header[i] == '}' && --depth == 0) return header.substr(start, i - start);
        }
        fail("ParseError", "unterminated section " + name);
    };
    std::string fl = section("floors");
    std::regex floor_re(R"((\w+):(-?\d+))");
    for (auto it = std::sregex_iterator(fl.begin(), fl.end(), floor_re); it != std::sregex_iterator(); ++it)
        w.floors[(*it)[1]] = std::stoi((*it)[2]);
    std::string df = section("diffs");
    std::regex diff_re(R"(\((\w+),(\w+)\):(-?\d+))");
    for (auto it = std::sregex_iterator(df.begin(), df.end(), diff_re); it != std::sregex_iterator(); ++it)
        w.diff_floors[{(*it)[1], (*it)[2]}] = std::stoi((*it)[3]);
    std::string bd = section("bounds");
    std::regex bound_re(R"(\[([\w,]*)\]:(-?\d+))");
    for (auto it = std::sregex_iterator(bd.begin(), bd.end(), bound_re); it != std::sregex_iterator(); ++it) {
        DegreeBound b;
        for (const auto& v : text::split((*it)[1].str(), ','))
            if (!v.empty()) b.vars.push_back(v);
        std::sort(b.vars.begin(), b.vars.end());
        b.ceiling = std::stoi((*it)[2]);
        w.bounds.push_back(b);
    }
    for (const auto& [v, f] : w.floors)
        if (s.var_index(v) < 0) fail("UnknownVariable", v);
    s.set_window(w);
}

}  // namespace vertexkit
