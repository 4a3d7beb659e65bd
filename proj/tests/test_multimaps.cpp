#include <doctest.h>

#include "vertexkit/errors.hpp"
#include "vertexkit/family.hpp"
#include "vertexkit/multimaps.hpp"
#include "oracles.hpp"

#include <random>

using namespace vertexkit;

namespace {

Tree T(const std::string& s) { return tree_parse(s); }

std::string kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return "";
}

int idx(const VertexAlgebra& V, const std::string& b) { return V.space().index_of(b); }

// sum_n (x1-x2)^n sum_k x2^k T^(k) c_n, straight from the table of Y.
LocalizedSeries binary_oracle(const VertexAlgebra& V, int a, int b) {
    const LocalizedSeries& e = *V.entry(a, b);
    LocalizedSeries s(V.space_ptr(), {"x1", "x2"}, {{"x1", "x2"}});
    s.set_ceiling(e.ceiling());
    for (const auto& [k, c] : e.terms())
        for (int j = 0; j + k[0] <= e.ceiling().value_or(8); ++j)
            s.add_term(Key{0, j, k[0]}, V.space().apply_divided_T(c, j));
    return s;
}

bool same(const SingularMultiMap& a, const SingularMultiMap& b) {
    Report r = compare_maps(a, b);
    INFO(r.format());
    return r.ok() && r.items()[0].checked > 0;
}

}  // namespace

TEST_CASE("vertex operator as a two-leaf map") {
    auto V = free_boson(3);
    auto f = from_vertex_operator(V);
    CHECK(f.tree == T("(..)"));
    CHECK(f.table.size() == 49);
    const int a = idx(V, "a1");
    CHECK(format_terms(*f.entry({a, a})) == "vac*(x1-x2)^-2 + a1a1 + a2a1*x1 + a2a1*x2");
    for (int i = 0; i < V.dim(); ++i)
        for (int j = 0; j < V.dim(); ++j) CHECK(equal_within(*f.entry({i, j}), binary_oracle(V, i, j)));

    Report r = check_membership(f);
    INFO(r.format());
    CHECK(r.ok());
    CHECK(r.find("leaf T-equation")->checked > 0);
    CHECK(r.find("invariance")->checked == 49);

    // deep x2 gives Y back; deep x1 gives it back through skew symmetry
    CHECK(same_table(to_vertex_operator(f, "x2", V.vacuum()), V));
    auto skew = to_vertex_operator(f, "x1", V.vacuum());
    for (int i = 0; i < V.dim(); ++i)
        for (int j = 0; j < V.dim(); ++j) CHECK(equal_within(*skew.entry(i, j), *V.entry(i, j)));

    SingularMultiMap node = f;
    node.invariance = Invariance::Node;
    CHECK(kind_of([&] { to_vertex_operator(node, "x2", 0); }) == "NotInvariant");
}

TEST_CASE("holomorphic two-leaf map is a product of translates") {
    auto V = from_comm_alg(polynomial_algebra(4));
    auto f = from_vertex_operator(V);
    const int t = idx(V, "t");
    // f(t (x) t) = (t + x1)(t + x2)
    const LocalizedSeries& e = *f.entry({t, t});
    CHECK(e.coeff({}, {}) == Vec::unit(idx(V, "t^2")));
    CHECK(e.coeff({{"x1", 1}}) == Vec::unit(t));
    CHECK(e.coeff({{"x2", 1}}) == Vec::unit(t));
    CHECK(e.coeff({{"x1", 1}, {"x2", 1}}) == Vec::unit(V.vacuum()));
    CHECK(e.terms().size() == 4);
    CHECK_FALSE(f.entry({idx(V, "t^4"), t}));  // leaves the space
    CHECK(check_membership(f).ok());
    auto back = to_vertex_operator(f, "x2", V.vacuum());
    CHECK(same_table(back, V));
}

TEST_CASE("small maps") {
    auto V = free_boson(3);
    auto id = identity_map(V.space_ptr());
    CHECK(id.tree.is_leaf());
    CHECK(check_membership(id).ok());
    auto u = unary_map(V);
    CHECK(tree_format(u.tree) == "|.");
    CHECK(format_terms(*u.entry({idx(V, "a1")})) == "a1 + a2*x1 + a3*x1^2");
    CHECK(check_membership(u).ok());
    auto vac = vacuum_map(V);
    CHECK(vac.arity() == 0);
    CHECK(vac.entry({})->coeff(Key{}) == V.vacuum_vec());
}

TEST_CASE("membership catches broken maps") {
    auto V = free_boson(3);
    auto f = from_vertex_operator(V);
    const int a = idx(V, "a1");
    auto bad = f;
    LocalizedSeries e = *bad.entry({a, a});
    e.add_term(Key{1, 0, 0}, Vec::unit(idx(V, "a2a1")));
    bad.set_entry({a, a}, e);
    Report r = check_membership(bad);
    CHECK_FALSE(r.passed("leaf T-equation"));
    CHECK_FALSE(r.passed("invariance"));
    CHECK(r.passed("allowed singularities"));

    // a singularity the tree does not allow
    auto left = compose(f, 1, f);
    LocalizedSeries extra(V.space_ptr(), left.series_vars(), {{"x1", "y1"}});
    extra.add_term({}, {{{"x1", "y1"}, -1}}, Vec::unit(a));
    left.set_entry({a, a, a}, *left.entry({a, a, a}) + extra);
    CHECK_FALSE(check_membership(left).passed("allowed singularities"));
}

TEST_CASE("scope follows the linear extensions") {
    // Exact entries on two pairs of leaves.  The y pole depends on input 3,
    // which only one of the two orderings of y and z permits.
    auto m = std::make_shared<GModule>("m", std::vector<std::string>{"p", "q"}, std::vector<int>{0, 0},
                                       std::vector<Vec>(2));
    Tree ht = T("((..)(..))");
    auto build = [&](bool depend) {
        SingularMultiMap f = make_map(ht, {m, m, m, m}, m);
        for (const auto& t : basis_tuples(f.inputs)) {
            int order = depend && t[2] == 1 ? 2 : 1;
            LocalizedSeries s(m, f.series_vars(), {{"y1", "y2"}, {"z1", "z2"}});
            s.add_term({}, {{{"y1", "y2"}, -order}, {{"z1", "z2"}, -1}}, Vec::unit(0));
            f.set_entry(t, s);
        }
        return f;
    };
    Report ok = check_membership(build(false));
    INFO(ok.format());
    CHECK(ok.passed("scope bot < x < y < z"));
    CHECK(ok.passed("scope bot < x < z < y"));
    CHECK(ok.find("scope bot < x < z < y")->checked > 0);
    Report bad = check_membership(build(true));
    CHECK(bad.passed("scope bot < x < y < z"));
    CHECK_FALSE(bad.passed("scope bot < x < z < y"));
}

TEST_CASE("composite of two vertex operators") {
    auto V = free_boson(3);
    auto f = from_vertex_operator(V);
    auto left = compose(f, 1, f);
    CHECK(left.tree == T("((..).)"));
    CHECK(left.series_vars() == std::vector<std::string>{"x1", "x2", "y1", "y2"});
    CHECK(left.table.size() == 343);
    for (const auto& [t, s] : left.table)
        CHECK(equal_within(series_derive(s, "x1"), series_derive(s, "y1") + series_derive(s, "y2")));
    Report r = check_membership(left);
    INFO(r.format());
    CHECK(r.ok());

    // the composite is the iterated product under x1+y1, x1+y2, x2
    ShiftSpec ch;
    ch.images["X1"] = {{"x1", 1}, {"y1", 1}};
    ch.images["X2"] = {{"x1", 1}, {"y2", 1}};
    ch.images["X3"] = {{"x2", 1}};
    ch.out_vars = {"x1", "x2", "y1", "y2"};
    ch.bounds = {{{"y1", "y2"}, 3}};
    int compared = 0;
    for (const auto& [t, s] : left.table) {
        auto h = shift_vars(oracle::iterated_product(V, t[0], t[1], t[2], {"X1", "X2", "X3"}), ch);
        INFO(t[0] << t[1] << t[2]);
        CHECK(equal_within(s, h));
        ++compared;
    }
    CHECK(compared == 343);

    // the other bracketing
    auto right = compose(f, 2, f);
    CHECK(right.tree == T("(.(..))"));
    CHECK(check_membership(right).ok());
}

TEST_CASE("identity is a unit for composition") {
    auto V = free_boson(2);
    auto f = from_vertex_operator(V);
    auto id = identity_map(V.space_ptr());
    CHECK(same(compose(f, 1, id), f));
    CHECK(same(compose(f, 2, id), f));
    CHECK(same(compose(id, 1, f), f));
}

TEST_CASE("two routes to the four-leaf composite") {
    auto V = free_boson(2);
    auto f = from_vertex_operator(V);
    auto one = compose(compose(f, 1, f), 3, f);
    auto two = compose(compose(f, 2, f), 1, f);
    CHECK(one.tree == T("((..)(..))"));
    CHECK(two.tree == one.tree);
    CHECK(same(one, two));
    Report r = check_membership(one);
    INFO(r.format());
    CHECK(r.ok());
}

TEST_CASE("composition is associative on random maps") {
    auto m = oracle::exact_poly(2);
    std::mt19937 rng(17);
    for (int trial = 0; trial < 3; ++trial) {
        auto g = oracle::random_binary(rng, m, 4);
        auto f = oracle::random_binary(rng, m, 4);
        auto h = oracle::random_binary(rng, m, 4);
        CHECK(same(compose(compose(g, 1, f), 1, h), compose(g, 1, compose(f, 1, h))));
        CHECK(same(compose(compose(g, 2, f), 3, h), compose(g, 2, compose(f, 2, h))));
        CHECK(same(compose(compose(g, 1, f), 3, h), compose(compose(g, 2, h), 1, f)));
    }
}

TEST_CASE("composition errors") {
    auto V = free_boson(2);
    auto f = from_vertex_operator(V);
    auto node = f;
    node.invariance = Invariance::Node;
    CHECK(kind_of([&] { compose(f, 1, node); }) == "NotInvariantInner");
    CHECK(kind_of([&] { compose(f, 3, f); }) == "IndexOutOfRange");
    auto H = from_vertex_operator(from_comm_alg(polynomial_algebra(2)));
    CHECK(kind_of([&] { compose(f, 1, H); }) == "ModuleMismatch");
}

TEST_CASE("refinement of the operator product") {
    auto V = free_boson(3);
    auto f = from_vertex_operator(V);
    auto ope = build_ope(V, 6);
    auto left = refine_map(ope, T("((..).)"));
    Report r = check_membership(left);
    INFO(r.format());
    CHECK(r.ok());
    CHECK(same(left, compose(f, 1, f)));
    CHECK(same(refine_map(ope, T("(.(..))")), compose(f, 2, f)));

    // at y2 = 0 the refined map is e^{x2 T} Y(Y(a, y1) b, x1 - x2) c
    for (const auto& [t, s] : left.table)
        CHECK(equal_within(specialize_zero(s, "y2"), oracle::nested_product(V, t[0], t[1], t[2])));
    CHECK(kind_of([&] { refine_map(left, T("(...)")); }) == "NotARefinement");
}

TEST_CASE("stem refinement is a bijection") {
    auto V = free_boson(3);
    auto f = from_vertex_operator(V);
    auto stem = refine_map(f, T("|(..)"));
    CHECK(check_membership(stem).ok());
    CHECK(same(stem, compose(unary_map(V), 1, f)));
    for (const auto& [t, s] : stem.table) {
        auto back = restrict_zero(s, "x1").rename({{"y1", "x1"}, {"y2", "x2"}});
        CHECK(equal_within(back, *f.entry(t)));
    }
}

TEST_CASE("refinements stay in the map spaces") {
    auto V = free_boson(2);
    AlgebraFamily fam(V, 4);
    auto trees = enumerate_trees(3, 2, false);
    int checked = 0;
    for (const auto& p : trees)
        for (const auto& q : trees) {
            if (p == q || p.leaves() != q.leaves() || !is_refinement(p, q)) continue;
            Report r = check_membership(refine_map(fam.at(p), q));
            INFO(tree_format(p) << " -> " << tree_format(q) << "\n" << r.format());
            CHECK(r.ok());
            ++checked;
        }
    CHECK(checked > 10);
}

TEST_CASE("vacuum insertion") {
    auto V = free_boson(3);
    auto f = from_vertex_operator(V);
    auto u = unary_map(V);
    // f(a (x) vac) = e^{x1 T} a, and f(vac (x) b) = e^{x2 T} b
    CHECK(same(vacuum_insert(f, 2, V.vacuum_vec()), u));
    CHECK(same(vacuum_insert(f, 1, V.vacuum_vec()), u));
    auto ope = build_ope(V, 6);
    for (int k = 1; k <= 3; ++k) CHECK(same(vacuum_insert(ope, k, V.vacuum_vec()), f));

    CHECK(kind_of([&] { vacuum_insert(f, 1, Vec::unit(idx(V, "a1"))); }) == "NotVacuum");
    CHECK(kind_of([&] { vacuum_insert(f, 3, V.vacuum_vec()); }) == "IndexOutOfRange");

    // a pole at the removed leaf cannot be evaluated
    SingularMultiMap g = make_map(T("(..)"), {V.space_ptr(), V.space_ptr()}, V.space_ptr());
    for (const auto& t : basis_tuples(g.inputs)) g.set_entry(t, localize(-1, "x1", "x2", V.space_ptr()));
    CHECK(kind_of([&] { vacuum_insert(g, 1, V.vacuum_vec()); }) == "ResidualSingularity");
}

TEST_CASE("partial evaluation") {
    auto V = free_boson(3);
    auto f = from_vertex_operator(V);
    const int a = idx(V, "a1"), b = idx(V, "a2");
    auto all = evaluate_partial(f, {{1, Vec::unit(a)}, {2, Vec::unit(b)}});
    CHECK(all.tree.is_empty());
    CHECK(all.series_vars() == std::vector<std::string>{"ex1", "ex2"});
    CHECK(equal_within(all.entry({})->rename({{"ex1", "x1"}, {"ex2", "x2"}}), *f.entry({a, b})));

    auto one = evaluate_partial(f, {{1, Vec::unit(a)}});
    CHECK(tree_format(one.tree) == "|.");
    CHECK(one.params.at("ex1") == std::optional<std::string>(""));
    CHECK(check_membership(one).ok());

    auto left = compose(f, 1, f);
    auto third = evaluate_partial(left, {{3, Vec::unit(a)}});
    Report r = check_membership(third);
    INFO(r.format());
    CHECK(r.ok());
    auto first = evaluate_partial(left, {{1, Vec::unit(a)}});
    CHECK(check_membership(first).ok());

    CHECK(kind_of([&] { evaluate_partial(f, {}, {"x1"}); }) == "EvalAtLocalizedSlot");
    auto stem = refine_map(f, T("|(..)"));
    auto rooted = evaluate_partial(stem, {}, {"x1"});
    CHECK(rooted.fixed.count("x1"));
    for (const auto& [t, s] : rooted.table)
        CHECK(equal_within(s.rename({{"y1", "x1"}, {"y2", "x2"}}), *f.entry(t)));
    CHECK(kind_of([&] { compose(rooted, 1, f); }) == "InvalidArgument");
}

TEST_CASE("operator product against both orderings") {
    auto V = free_boson(3);
    auto ope = build_ope(V, 6);
    Report r = check_membership(ope);
    INFO(r.format());
    CHECK(r.ok());
    int compared = 0;
    for (const auto& [t, s] : ope.table) {
        auto prods = operator_products(V, t[0], t[1], t[2]);
        REQUIRE(prods);
        auto at0 = specialize_zero(s, "x3");
        const int cap = 4;
        auto big = expand_diff(at0, "x1", "x2", "x2", cap).rename({{"x1", "x"}, {"x2", "y"}});
        auto small = expand_diff(at0, "x1", "x2", "x1", cap).rename({{"x1", "x"}, {"x2", "y"}});
        CHECK(equal_within(big, prods->first));
        CHECK(equal_within(small, prods->second));
        ++compared;
    }
    CHECK(compared == 343);
    CHECK(kind_of([&] { build_ope(V, 1); }) == "LocalityOrderTooSmall");

    auto H = from_comm_alg(polynomial_algebra(3));
    auto hope = build_ope(H, 4);
    CHECK(check_membership(hope).ok());
    CHECK(same(vacuum_insert(hope, 2, H.vacuum_vec()), from_vertex_operator(H)));
}

TEST_CASE("setting a variable to zero inside pairs") {
    auto x = localize(-2, "x", "y");
    CHECK(format_terms(specialize_zero(x, "y")) == "x^-2");
    CHECK(format_terms(specialize_zero(localize(-1, "x", "y"), "x")) == "-y^-1");
    auto p = parse_series("x^-1*y^2 + y", GModule::scalars(), {"x", "y"});
    CHECK(format_terms(specialize_zero(p, "y")) == "0");
    CHECK(kind_of([&] { specialize_zero(p, "x"); }) == "SingularAtZero");
}

TEST_CASE("multimap text round trip") {
    auto V = free_boson(2);
    auto f = from_vertex_operator(V);
    auto left = compose(f, 1, f);
    for (const auto& m : {f, left, evaluate_partial(left, {{2, Vec::unit(1)}}), unary_map(V)}) {
        auto text = format_multimap(m);
        auto back = parse_multimap(text);
        CHECK(format_multimap(back) == text);
        CHECK(back.tree == m.tree);
        CHECK(back.params == m.params);
        CHECK(same(back, m));
    }
    CHECK(kind_of([&] { parse_multimap("multimap\ntree (..)\nbogus\n"); }) == "ParseError");
    CHECK(kind_of([&] { parse_multimap("tree (..)\n"); }) == "ParseError");
}

TEST_CASE("algebra family") {
    SUBCASE("holomorphic") {
        Report r = algebra_family_check(from_comm_alg(polynomial_algebra(4)));
        INFO(r.format());
        CHECK(r.ok());
        for (const char* name : {"composition closure", "refinement closure", "unit law", "symmetric action", "regular"})
            CHECK(r.find(name)->checked > 0);
    }
    SUBCASE("free boson") {
        Report r = algebra_family_check(free_boson(2));
        INFO(r.format());
        CHECK(r.ok());
    }
    SUBCASE("broken vacuum row") {
        auto V = free_boson(2);
        const int a = idx(V, "a1");
        LocalizedSeries e = *V.entry(V.vacuum(), a);
        e.add_term(Key{1}, Vec::unit(idx(V, "a2")));
        V.set_entry(V.vacuum(), a, e);
        Report r = algebra_family_check(V);
        CHECK_FALSE(r.passed("unit law"));
    }
}
