#include "vertexkit/vertexgroup.hpp"

#include "vertexkit/errors.hpp"

namespace vertexkit {

namespace {

void validate(const LocalizedSeries& s, bool trivial) {
    if (!s.module().is_scalar()) fail("ModuleMismatch", "singular functions carry scalar coefficients");
    if (s.nvars() != 1 || s.vars()[0] != "z") fail("UnknownVariable", "singular functions use the single variable z");
    for (const auto& [k, c] : s.terms()) {
        if (k.size() != 1) fail("UnsupportedSubstitution", "difference symbols are not singular functions of one variable");
        if (trivial && k[0] < 0) fail("NegativeExponent", "trivial vertex group admits no negative powers");
    }
}

LocalizedSeries over_z(const LocalizedSeries& s) {
    if (s.nvars() == 1 && s.npairs() == 0) return s;
    if (s.nvars() == 0) return s.embed({"z"}, {});
    LocalizedSeries t = s;
    t.prune_declarations();
    if (t.nvars() == 0) return t.embed({"z"}, {});
    return t;
}

}  // namespace

KElement::KElement(LocalizedSeries s, bool trivial) : s_(over_z(s)), trivial_(trivial) {
    validate(s_, trivial_);
}

KElement KElement::monomial(int i, const Q& c, bool trivial) {
    return KElement(scalar_monomial({"z"}, {{"z", i}}, c), trivial);
}

KElement KElement::parse(const std::string& text, bool trivial) {
    return KElement(parse_series(text, GModule::scalars(), {"z"}), trivial);
}

KElement k_act(const HopfElement& h, const KElement& k) {
    LocalizedSeries out(GModule::scalars(), {"z"});
    out.set_window(k.series().window());
    for (const auto& [j, c] : h.terms()) out += c * series_derive_divided(k.series(), "z", j);
    return KElement(out, k.trivial());
}

KElement k_antipode(const KElement& k) { return KElement(scale_var(k.series(), "z", Q(-1)), k.trivial()); }

KElement k_mul(const KElement& a, const KElement& b) {
    return KElement(series_mul(a.series(), b.series()), a.trivial() && b.trivial());
}

Q pairing(const HopfElement& h, const KElement& f) {
    for (const auto& [k, c] : f.series().terms())
        if (k[0] < 0) fail("NegativeExponent", "pairing needs a polynomial, found z^" + std::to_string(k[0]));
    Q r(0);
    for (const auto& [i, c] : h.terms()) {
        if (f.ceiling() && i > *f.ceiling())
            fail("WindowUnderflow", "z^" + std::to_string(i) + " lies outside the window");
        r += c * f.coeff(i);
    }
    return r;
}

bool operator==(const KElement& a, const KElement& b) {
    return a.trivial() == b.trivial() && equal_within(a.series(), b.series());
}

std::string format_k(const KElement& k) { return format_terms(k.series()); }

}  // namespace vertexkit
