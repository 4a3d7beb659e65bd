#pragma once

#include "vertexkit/rational.hpp"

#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace vertexkit {

// Finite combination of divided powers D(i) = T^i / i!.
class HopfElement {
public:
    HopfElement() = default;
    static HopfElement D(int i, const Q& c = Q(1));

    const std::map<int, Q>& terms() const { return terms_; }
    Q coeff(int i) const;
    bool is_zero() const { return terms_.empty(); }
    int degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first; }

    void add(int i, const Q& c);
    HopfElement& operator+=(const HopfElement& o);
    friend HopfElement operator+(HopfElement a, const HopfElement& b) { a += b; return a; }
    friend HopfElement operator-(HopfElement a, const HopfElement& b);
    friend HopfElement operator*(const Q& c, HopfElement a);
    friend bool operator==(const HopfElement& a, const HopfElement& b) { return a.terms_ == b.terms_; }

private:
    std::map<int, Q> terms_;
};

struct SweedlerTerm {
    HopfElement left;
    HopfElement right;
    Q coeff;
};

HopfElement hopf_mul(const HopfElement& a, const HopfElement& b);
// Terms ordered by left index, then right index.
std::vector<SweedlerTerm> hopf_comul(const HopfElement& a);
HopfElement hopf_antipode(const HopfElement& a);
Q hopf_counit(const HopfElement& a);

// Coefficientwise view of a Sweedler sum: (i, j) -> coefficient of D(i)⊗D(j).
std::map<std::pair<int, int>, Q> sweedler_table(const std::vector<SweedlerTerm>& s);

std::string format_hopf(const HopfElement& a);
HopfElement parse_hopf(std::string_view text);

}  // namespace vertexkit
