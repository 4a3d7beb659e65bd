#include <doctest.h>

#include "vertexkit/errors.hpp"
#include "vertexkit/vertexgroup.hpp"
#include "oracles.hpp"

using namespace vertexkit;

namespace {

KElement Z(int i, const Q& c = Q(1)) { return KElement::monomial(i, c); }

}  // namespace

TEST_CASE("singular function action examples") {
    CHECK(k_act(HopfElement::D(1), Z(-1)) == Z(-2, Q(-1)));
    for (int k = -3; k <= 3; ++k) CHECK(k_act(HopfElement::D(0), Z(k)) == Z(k));
    CHECK(k_act(HopfElement::D(2), Z(3)) == Z(1, Q(3)));
}

TEST_CASE("action matches the falling-factorial binomial") {
    for (int i = -6; i <= 6; ++i)
        for (int j = 0; j <= 6; ++j) {
            KElement r = k_act(HopfElement::D(j), Z(i));
            Q expect = oracle::falling_binom(i, j);
            CHECK(r.coeff(i - j) == expect);
            CHECK(r.series().terms().size() == (expect == 0 ? 0u : 1u));
        }
}

TEST_CASE("translation closure by direct action and by the coproduct") {
    for (int i1 = -3; i1 <= 3; ++i1)
        for (int i2 = -3; i2 <= 3; ++i2)
            for (int j = 0; j <= 4; ++j) {
                KElement prod = k_mul(Z(i1), Z(i2));
                KElement direct = k_act(HopfElement::D(j), prod);
                KElement expect = Z(i1 + i2 - j, oracle::falling_binom(i1 + i2, j));
                CHECK(direct == expect);
                LocalizedSeries acc(GModule::scalars(), {"z"});
                for (const auto& t : hopf_comul(HopfElement::D(j)))
                    acc += t.coeff * k_mul(k_act(t.left, Z(i1)), k_act(t.right, Z(i2))).series();
                CHECK(KElement(acc) == expect);
            }
}

TEST_CASE("antipode on singular functions") {
    CHECK(k_antipode(Z(-3)) == Z(-3, Q(-1)));
    CHECK(k_antipode(Z(0)) == Z(0));
    for (int k = -4; k <= 4; ++k) CHECK(k_antipode(k_antipode(Z(k))) == Z(k));
    auto a = KElement::parse("2*z^-2 + z - 3");
    auto b = KElement::parse("z^-1 + 1/2*z^3");
    CHECK(k_antipode(k_mul(a, b)) == k_mul(k_antipode(b), k_antipode(a)));
}

TEST_CASE("dual pairing") {
    CHECK(pairing(HopfElement::D(2), Z(2)) == 1);
    CHECK(pairing(HopfElement::D(1), Z(0)) == 0);
    CHECK(pairing(HopfElement::D(0), KElement::parse("3 + z")) == 3);
    CHECK_THROWS_AS(pairing(HopfElement::D(0), Z(-1)), Error);
    try {
        pairing(HopfElement::D(0), Z(-1));
    } catch (const Error& e) {
        CHECK(e.kind() == "NegativeExponent");
    }
}

TEST_CASE("action on polynomials is the transpose of multiplication") {
    for (int i = 0; i <= 6; ++i)
        for (int j = 0; j <= 6; ++j)
            for (int k = 0; k <= 8; ++k) {
                Q lhs = pairing(HopfElement::D(i), k_act(HopfElement::D(j), Z(k)));
                Q rhs = pairing(hopf_mul(HopfElement::D(i), HopfElement::D(j)), Z(k));
                CHECK(lhs == rhs);
            }
}

TEST_CASE("trivial vertex group forbids singular functions") {
    CHECK_NOTHROW(KElement::monomial(2, Q(1), true));
    CHECK_THROWS_AS(KElement::monomial(-1, Q(1), true), Error);
    KElement p = KElement::parse("z^3 + z", true);
    CHECK(k_act(HopfElement::D(1), p) == KElement::parse("3*z^2 + 1", true));
    CHECK_THROWS_AS(KElement(parse_series("(z-w)^-1")), Error);
}
