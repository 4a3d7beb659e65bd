#include <doctest.h>

#include "vertexkit/errors.hpp"
#include "vertexkit/valg.hpp"

#include <algorithm>
#include <functional>
#include <map>

using namespace vertexkit;

namespace {

// Fock states as multisets of creation modes, kept independent of the
// library's own mode code.
using Modes = std::multiset<int, std::greater<int>>;
using Fock = std::map<Modes, Q>;

Fock lower(int n, const Fock& s) {
    Fock out;
    for (const auto& [m, c] : s) {
        if (n < 0) {
            Modes k = m;
            k.insert(-n);
            out[k] += c;
        } else if (n > 0 && m.count(n)) {
            Modes k = m;
            k.erase(k.find(n));
            out[k] += c * Q(n) * Q(long(m.count(n)));
        }
    }
    std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
    return out;
}

Modes modes_of(const std::string& name) {
    Modes m;
    if (name == "vac") return m;
    std::size_t i = 0;
    while (i < name.size()) {
        REQUIRE(name[i] == 'a');
        std::size_t j = i + 1;
        while (j < name.size() && std::isdigit(static_cast<unsigned char>(name[j]))) ++j;
        m.insert(std::stoi(name.substr(i + 1, j - i - 1)));
        i = j;
    }
    return m;
}

int weight(const Modes& m) {
    int w = 0;
    for (int n : m) w += n;
    return w;
}

Vec to_vec(const VertexAlgebra& V, const Fock& f) {
    Vec v;
    for (const auto& [m, c] : f) {
        if (weight(m) > *V.weight_cutoff()) continue;
        for (int i = 0; i < V.dim(); ++i)
            if (modes_of(V.space().basis_name(i)) == m) v.add(i, c);
    }
    return v;
}

// sum_n a_n w x^(-n-1), and :a(x)a(x): w, straight from the modes.
LocalizedSeries field_a(const VertexAlgebra& V, int w) {
    const int W = *V.weight_cutoff();
    Modes mw = modes_of(V.space().basis_name(w));
    LocalizedSeries s(V.space_ptr(), {"x"});
    s.set_ceiling(W - 1 - weight(mw));
    for (int n = -W; n <= W; ++n) {
        if (n == 0) continue;
        s.add_term(Key{-n - 1}, to_vec(V, lower(n, {{mw, Q(1)}})));
    }
    return s;
}

LocalizedSeries field_aa(const VertexAlgebra& V, int w) {
    const int W = *V.weight_cutoff();
    Modes mw = modes_of(V.space().basis_name(w));
    LocalizedSeries s(V.space_ptr(), {"x"});
    s.set_ceiling(W - 2 - weight(mw));
    for (int m = -W; m <= W; ++m)
        for (int n = -W; n <= W; ++n) {
            if (m == 0 || n == 0) continue;
            // annihilators to the right
            int first = m, second = n;
            if (m > 0 && n < 0) std::swap(first, second);
            Fock f = lower(first, lower(second, {{mw, Q(1)}}));
            s.add_term(Key{-m - n - 2}, to_vec(V, f));
        }
    return s;
}

int idx(const VertexAlgebra& V, const std::string& b) { return V.space().index_of(b); }

Vec vec(const VertexAlgebra& V, const std::string& s) { return parse_vec(V.space(), s); }

}  // namespace

TEST_CASE("free boson basis and translation") {
    auto V = free_boson(4);
    CHECK(V.dim() == 12);
    CHECK(V.space().basis_name(V.vacuum()) == "vac");
    CHECK(V.space().apply_T(vec(V, "a1")) == vec(V, "a2"));
    CHECK(V.space().apply_T(vec(V, "a2")) == vec(V, "2*a3"));
    CHECK(V.space().apply_T(vec(V, "a1a1")) == vec(V, "2*a2a1"));
    CHECK(V.space().apply_T(vec(V, "a4")).empty());
    CHECK(V.space().apply_T(V.vacuum_vec()).empty());
}

TEST_CASE("free boson generator field") {
    auto V = free_boson(4);
    const int a = idx(V, "a1");
    auto e = *V.entry(a, a);
    CHECK(format_terms(e) == "vac*x^-2 + a1a1 + a2a1*x + a3a1*x^2");
    for (int w = 0; w < V.dim(); ++w) {
        INFO(V.space().basis_name(w));
        CHECK(equal_within(*V.entry(a, w), field_a(V, w)));
        CHECK(equal_within(*V.entry(idx(V, "a1a1"), w), field_aa(V, w)));
        CHECK(equal_within(*V.entry(idx(V, "a2"), w), series_derive(field_a(V, w), "x")));
        CHECK(equal_within(*V.entry(V.vacuum(), w), series_constant(V.space_ptr(), Vec::unit(w), {"x"})));
    }
}

TEST_CASE("free boson axioms") {
    for (int W : {2, 4}) {
        auto V = free_boson(W);
        Report r = check_axioms(V);
        INFO(r.format());
        CHECK(r.ok());
        for (const char* name : {"vacuum annihilated by T", "vacuum identity", "vacuum creation at zero", "creation",
                                 "translation covariance", "derivative", "translation on both slots"}) {
            REQUIRE(r.find(name));
            CHECK(r.find(name)->checked > 0);
        }
        Report q = check_quasisymmetry(V);
        CHECK(q.ok());
        CHECK(q.find("quasisymmetry")->checked == V.dim() * V.dim());
    }
}

TEST_CASE("free boson locality") {
    auto V = free_boson(4);
    const int a = idx(V, "a1");
    CHECK(check_locality(V, a, a, 8) == 2);
    for (int b = 0; b < V.dim(); ++b) CHECK(check_locality(V, b, V.vacuum(), 8) == 0);
    CHECK(check_locality(V, idx(V, "a2"), a, 8) == 3);
    CHECK_THROWS_AS(check_locality(V, a, a, 1), Error);
    // d^(k) of the generator against itself: order 2 + both derivative counts
    CHECK(locality_order(V, 8) == 8);
    CHECK_FALSE(locality_order(V, 7).has_value());
}

TEST_CASE("operator products are the two orderings") {
    auto V = free_boson(3);
    const int a = idx(V, "a1");
    auto p = operator_products(V, a, a, V.vacuum());
    REQUIRE(p);
    // Y(a,x)Y(a,y)|0> contains (x-y)^-2 expanded in y/x: sum (n+1) x^(-n-2) y^n
    // the inner factor is known up to y^2 at W = 3
    for (int n = 0; n <= 2; ++n) CHECK(p->first.coeff({{"x", -n - 2}, {"y", n}}) == Vec::unit(V.vacuum(), Q(n + 1)));
    for (int n = 0; n <= 2; ++n) CHECK(p->second.coeff({{"y", -n - 2}, {"x", n}}) == Vec::unit(V.vacuum(), Q(n + 1)));
}

TEST_CASE("mutations of the structure constants are caught") {
    auto base = free_boson(4);
    auto caught = [](const VertexAlgebra& V) {
        return !check_axioms(V).ok() || !check_quasisymmetry(V).ok() || !locality_order(V, 8).has_value();
    };
    CHECK_FALSE(caught(base));
    auto V = base;
    LocalizedSeries e = *V.entry(idx(V, "a1"), idx(V, "a1"));
    e.add_term(Key{0}, vec(V, "a1a1"));
    V.set_entry(idx(V, "a1"), idx(V, "a1"), e);
    CHECK(caught(V));

    auto Z = base;
    for (int j = 0; j < Z.dim(); ++j) Z.set_entry(Z.vacuum(), j, LocalizedSeries(Z.space_ptr(), {"x"}));
    Report r = check_axioms(Z);
    CHECK_FALSE(r.passed("vacuum identity"));
}

TEST_CASE("holomorphic model from the polynomial algebra") {
    auto A = polynomial_algebra(4);
    CHECK(check_comm_alg(A).ok());
    auto V = from_comm_alg(A);
    const GModule& m = V.space();
    auto t = [&](int k) { return Vec::unit(k); };
    CHECK(format_terms(*Y(V, t(1), t(1))) == "t^2 + t*x");
    for (int k = 0; k <= 4; ++k) CHECK(equal_within(*Y(V, t(0), t(k)), series_constant(V.space_ptr(), t(k), {"x"})));
    CHECK(format_terms(*Y(V, t(2), t(0))) == "t^2 + 2*t*x + 1*x^2");  // the unit's basis name is 1
    CHECK(m.basis_name(V.vacuum()) == "1");
    CHECK_FALSE(V.entry(3, 2));  // t^5 leaves the space
    CHECK(V.is_holomorphic());

    Report r = check_axioms(V);
    INFO(r.format());
    CHECK(r.ok());
    CHECK(check_quasisymmetry(V).ok());
    for (int a = 0; a < V.dim(); ++a)
        for (int b = 0; b < V.dim(); ++b) CHECK(check_locality(V, a, b, 8) == 0);

    // the algebra comes back, and so does Y
    CHECK(to_comm_alg(V) == A);
    auto V2 = from_comm_alg(to_comm_alg(V));
    CHECK(same_table(V, V2));
    // Y'(a,x)b = sum_i x^i [Y(T^(i) a, x) b]_{x=0}, coefficientwise
    for (int a = 0; a < V.dim(); ++a)
        for (int b = 0; b < V.dim(); ++b) {
            const LocalizedSeries* e = V.entry(a, b);
            if (!e) continue;
            for (int i = 0; i <= 4; ++i) {
                auto shifted = Y(V, m.apply_divided_T(t(a), i), t(b));
                REQUIRE(shifted);
                CHECK(e->coeff(Key{i}) == shifted->coeff(Key{0}));
            }
        }
}

TEST_CASE("free boson is not holomorphic") {
    CHECK_THROWS_AS(to_comm_alg(free_boson(2)), Error);
    try {
        to_comm_alg(free_boson(2));
    } catch (const Error& e) {
        CHECK(e.kind() == "NotHolomorphic");
    }
}

TEST_CASE("vertex algebra text round trip") {
    auto V = free_boson(3);
    auto text = format_vertex_algebra(V);
    auto P = parse_vertex_algebra(text);
    CHECK(same_table(V, P));
    CHECK(format_vertex_algebra(P) == text);
    CHECK(P.weight_cutoff() == 3);

    auto H = from_comm_alg(polynomial_algebra(3));
    auto Hp = parse_vertex_algebra(format_vertex_algebra(H));
    CHECK(same_table(H, Hp));
    CHECK_FALSE(Hp.weight_cutoff());

    CHECK_THROWS_AS(parse_vertex_algebra("basis vac 0\nfoo\n"), Error);
    CHECK_THROWS_AS(parse_vertex_algebra("basis vac 0\nY vac zz 0 -> vac\n"), Error);
}
