#pragma once

#include "vertexkit/hopf.hpp"
#include "vertexkit/series.hpp"

#include <optional>
#include <string>

namespace vertexkit {

// Singular function of one variable `z` with scalar coefficients.  With the
// trivial flag set only polynomials are admitted (K is then H dual).
class KElement {
public:
    KElement() : KElement(LocalizedSeries(GModule::scalars(), {"z"})) {}
    explicit KElement(LocalizedSeries s, bool trivial = false);
    static KElement monomial(int i, const Q& c = Q(1), bool trivial = false);
    static KElement parse(const std::string& text, bool trivial = false);

    const LocalizedSeries& series() const { return s_; }
    bool trivial() const { return trivial_; }
    Q coeff(int i) const { return s_.coeff(Key{i}).get(0); }
    std::optional<int> ceiling() const { return s_.ceiling(); }
    void set_ceiling(std::optional<int> n) { s_.set_ceiling(n); }

private:
    LocalizedSeries s_;
    bool trivial_ = false;
};

// D(j) z^i = C(i, j) z^(i-j), negative i included.
KElement k_act(const HopfElement& h, const KElement& k);
// z^i -> (-1)^i z^i
KElement k_antipode(const KElement& k);
KElement k_mul(const KElement& a, const KElement& b);
// <D(i), sum r_k z^k> = r_i.  Needs a polynomial.
Q pairing(const HopfElement& h, const KElement& f);

bool operator==(const KElement& a, const KElement& b);
std::string format_k(const KElement& k);

}  // namespace vertexkit
