#include "vertexkit/hopf.hpp"

#include "vertexkit/errors.hpp"
#include "vertexkit/text.hpp"

#include <sstream>

namespace vertexkit {

HopfElement HopfElement::D(int i, const Q& c) {
    HopfElement h;
    h.add(i, c);
    return h;
}

Q HopfElement::coeff(int i) const {
    auto it = terms_.find(i);
    return it == terms_.end() ? Q(0) : it->second;
}

void HopfElement::add(int i, const Q& c0) {
    if (i < 0) fail("InvalidIndex", "divided-power index must be non-negative");
    Q c = c0;
    c.canonicalize();
    if (c == 0) return;
    auto [it, fresh] = terms_.emplace(i, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

HopfElement& HopfElement::operator+=(const HopfElement& o) {
    for (const auto& [i, c] : o.terms_) add(i, c);
    return *this;
}

HopfElement operator-(HopfElement a, const HopfElement& b) {
    for (const auto& [i, c] : b.terms_) a.add(i, -c);
    return a;
}

HopfElement operator*(const Q& c, HopfElement a) {
    if (c == 0) return {};
    for (auto& [i, q] : a.terms_) q *= c;
    return a;
}

HopfElement hopf_mul(const HopfElement& a, const HopfElement& b) {
    HopfElement r;
    for (const auto& [i, ca] : a.terms())
        for (const auto& [j, cb] : b.terms()) r.add(i + j, ca * cb * binom(i + j, i));
    return r;
}

std::vector<SweedlerTerm> hopf_comul(const HopfElement& a) {
    std::map<std::pair<int, int>, Q> acc;
    for (const auto& [i, c] : a.terms())
        for (int p = 0; p <= i; ++p) acc[{p, i - p}] += c;
    std::vector<SweedlerTerm> out;
    for (const auto& [pq, c] : acc)
        if (c != 0) out.push_back({HopfElement::D(pq.first), HopfElement::D(pq.second), c});
    return out;
}

std::map<std::pair<int, int>, Q> sweedler_table(const std::vector<SweedlerTerm>& s) {
    std::map<std::pair<int, int>, Q> out;
    for (const auto& t : s)
        for (const auto& [i, ci] : t.left.terms())
            for (const auto& [j, cj] : t.right.terms()) out[{i, j}] += t.coeff * ci * cj;
    std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
    return out;
}

HopfElement hopf_antipode(const HopfElement& a) {
    HopfElement r;
    for (const auto& [i, c] : a.terms()) r.add(i, (i % 2) ? Q(-c) : c);
    return r;
}

Q hopf_counit(const HopfElement& a) { return a.coeff(0); }

std::string format_hopf(const HopfElement& a) {
    if (a.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = a.terms().rbegin(); it != a.terms().rend(); ++it) {
        Q c = it->second;
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        first = false;
        Q m = abs(c);
        if (m != 1) os << m.get_str() << "*";
        os << "D(" << it->first << ")";
    }
    return os.str();
}

HopfElement parse_hopf(std::string_view s) {
    HopfElement r;
    auto terms = text::split_sum(s);
    if (terms.empty()) fail("ParseError", "empty Hopf element");
    for (auto t : terms) {
        if (t == "0") continue;
        Q sign(1);
        if (t[0] == '-') {
            sign = -1;
            t = text::trim(t.substr(1));
        }
        Q coef(1);
        long idx = 0;
        bool seen_d = false;
        for (const auto& f : text::split_product(t)) {
            if (f.size() >= 4 && f[0] == 'D' && f[1] == '(' && f.back() == ')') {
                if (seen_d) fail("ParseError", "two D factors in '" + t + "'");
                if (!text::parse_int(f.substr(2, f.size() - 3), idx) || idx < 0)
                    fail("ParseError", "bad divided-power index in '" + f + "'");
                seen_d = true;
            } else {
                coef *= parse_rational(f);
            }
        }
        r.add(seen_d ? int(idx) : 0, sign * coef);
    }
    return r;
}

}  // namespace vertexkit
