from fractions import Fraction

import pytest

import vertexkit as vk


def test_divided_powers():
    d1 = vk.Hopf.D(1)
    assert d1 * d1 == vk.Hopf("2*D(2)")
    assert vk.Hopf.D(3).antipode() == vk.Hopf("-D(3)")
    assert vk.Hopf.D(0).counit() == 1
    assert sorted(vk.Hopf.D(2).coproduct()) == [("D(0)", "D(2)", 1), ("D(1)", "D(1)", 1), ("D(2)", "D(0)", 1)]


def test_expansion_matches_geometric_series():
    s = vk.Series("(x-y)^-1")
    s.ceiling = 3
    e = s.expand("x", "y", "y")
    assert str(e) == "x^-1 + x^-2*y + x^-3*y^2 + x^-4*y^3"
    assert e.coeff({"x": -3, "y": 2}) == 1


def test_delta_from_both_expansions():
    s = vk.localize(-1, "x", "y")
    s.ceiling = 4
    delta = s.expand("x", "y", "y", 4) - s.expand("x", "y", "x", 4)
    for n in range(-5, 5):
        assert delta.coeff({"x": -n - 1, "y": n}) == 1


def test_hopf_action_on_series():
    s = vk.Series("x^-1", ["x"])
    # D(1) acts as -d/dx on scalar series
    assert str(s.act(vk.Hopf.D(1))) == "x^-2"
    assert s.derive("x").coeff({"x": -2}) == Fraction(-1)


def test_trees():
    assert vk.linear_extensions("((..)(..))") == ["bot < x < y < z", "bot < x < z < y"]
    assert vk.is_refinement("(...)", "((..).)")
    assert not vk.is_refinement("((..).)", "(...)")
    assert "|(..)" in vk.enumerate_trees(2, 2)


def test_free_boson():
    V = vk.VertexAlgebra.free_boson(3)
    assert "a1" in V.basis and V.weight_cutoff == 3
    assert all(item["pass"] for item in V.check_axioms())
    assert all(item["pass"] for item in V.check_quasisymmetry())
    assert V.locality("a1", "a1") == 2
    assert V.Y("a1", "a1").startswith("vac*x^-2")
    assert vk.VertexAlgebra.parse(str(V)).same_table(V)


def test_holomorphic_family():
    V = vk.VertexAlgebra.holomorphic(2)
    assert V.locality_order() == 0
    report = vk.algebra_family_check(V)
    assert {r["name"] for r in report} >= {"composition closure", "refinement closure", "unit law", "symmetric action"}
    assert all(r["pass"] for r in report)


def test_multimaps():
    V = vk.VertexAlgebra.free_boson(2)
    f = vk.MultiMap.from_vertex_operator(V)
    assert f.tree == "(..)" and f.arity == 2
    left = f.compose(1, f)
    assert left.tree == "((..).)"
    assert all(r["pass"] for r in left.check())
    assert vk.MultiMap.parse(str(f)).same_as(f)
    stem = f.refine("|(..)")
    assert all(r["pass"] for r in stem.check())


def test_errors_carry_kind():
    f = vk.MultiMap.from_vertex_operator(vk.VertexAlgebra.free_boson(2))
    with pytest.raises(vk.Error) as info:
        f.refine("(.)")
    assert info.value.args[0] == "NotARefinement"
    with pytest.raises(vk.Error) as info:
        vk.Hopf("D(-1)")
    assert info.value.args[0] == "ParseError"
