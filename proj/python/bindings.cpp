// Python bindings.  Series, algebras and multimaps cross the boundary as
// objects; rationals come back as fractions.Fraction.

#include "vertexkit/errors.hpp"
#include "vertexkit/family.hpp"
#include "vertexkit/multimaps.hpp"
#include "vertexkit/vertexgroup.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace vertexkit;

namespace {

py::object fraction(const Q& q) {
    static py::object Fraction = py::module_::import("fractions").attr("Fraction");
    return Fraction(q.get_str());
}

py::list report_items(const Report& r) {
    py::list out;
    for (const auto& it : r.items()) {
        py::dict d;
        d["name"] = it.name;
        d["pass"] = it.pass;
        d["checked"] = it.checked;
        d["skipped"] = it.skipped;
        d["failures"] = it.failures;
        out.append(d);
    }
    return out;
}

int basis_index(const VertexAlgebra& V, const std::string& name) {
    int i = V.space().index_of(name);
    if (i < 0) fail("UnknownBasis", name);
    return i;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Exact singular multilinear maps and vertex algebras";

    static py::exception<Error> error(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            // args = (kind, message)
            PyErr_SetObject(error.ptr(), py::make_tuple(e.kind(), e.message()).ptr());
        }
    });

    // ---- divided powers
    py::class_<HopfElement>(m, "Hopf")
        .def(py::init([](const std::string& text) { return parse_hopf(text); }), py::arg("text"))
        .def_static("D", [](int i) { return HopfElement::D(i); })
        .def("__str__", &format_hopf)
        .def("__repr__", [](const HopfElement& h) { return "Hopf('" + format_hopf(h) + "')"; })
        .def("__eq__", [](const HopfElement& a, const HopfElement& b) { return a == b; })
        .def("__mul__", &hopf_mul)
        .def("__add__", [](const HopfElement& a, const HopfElement& b) { return a + b; })
        .def("antipode", &hopf_antipode)
        .def("counit", [](const HopfElement& h) { return fraction(hopf_counit(h)); })
        .def("coproduct", [](const HopfElement& h) {
            py::list out;
            for (const auto& t : hopf_comul(h))
                out.append(py::make_tuple(format_hopf(t.left), format_hopf(t.right), fraction(t.coeff)));
            return out;
        });

    // ---- series
    py::class_<LocalizedSeries>(m, "Series")
        .def(py::init([](const std::string& text, std::vector<std::string> vars) {
                 return parse_series(text, GModule::scalars(), std::move(vars));
             }),
             py::arg("text"), py::arg("vars") = std::vector<std::string>{})
        .def_property_readonly("vars", &LocalizedSeries::vars)
        .def_property("ceiling", &LocalizedSeries::ceiling, &LocalizedSeries::set_ceiling)
        .def_property_readonly("window", &format_window)
        .def("coeff",
             [](const LocalizedSeries& s, const std::map<std::string, int>& exps,
                const std::map<std::pair<std::string, std::string>, int>& pairs) {
                 return fraction(s.coeff(exps, pairs).get(0));
             },
             py::arg("exps"), py::arg("pairs") = std::map<std::pair<std::string, std::string>, int>{})
        .def("__str__", &format_terms)
        .def("__repr__", [](const LocalizedSeries& s) { return "Series('" + format_terms(s) + "')"; })
        .def("__add__", [](const LocalizedSeries& a, const LocalizedSeries& b) { return a + b; })
        .def("__sub__", [](const LocalizedSeries& a, const LocalizedSeries& b) { return a - b; })
        .def("__mul__", &series_mul)
        .def("equal_within", &equal_within)
        .def("derive", &series_derive, py::arg("var"))
        .def("act", [](const LocalizedSeries& s, const HopfElement& h) { return hopf_act(h, s); })
        .def("is_invariant", &is_invariant)
        .def("expand", &expand_diff, py::arg("x"), py::arg("y"), py::arg("subordinate"),
             py::arg("sub_cap") = std::nullopt)
        .def("regular_along", &regular_along, py::arg("x"), py::arg("y"), py::arg("sub_cap"));

    m.def("localize", [](int k, const std::string& x, const std::string& y) { return localize(k, x, y); },
          "(x-y)^k as a series", py::arg("k"), py::arg("x"), py::arg("y"));

    // ---- trees
    m.def("enumerate_trees",
          [](int leaves, int height, bool include_empty) {
              std::vector<std::string> out;
              for (const auto& t : enumerate_trees(leaves, height, include_empty)) out.push_back(tree_format(t));
              return out;
          },
          py::arg("max_leaves"), py::arg("max_height"), py::arg("include_empty") = true);
    m.def("linear_extensions", [](const std::string& tree) {
        std::vector<std::string> out;
        for (const auto& e : linear_extensions(tree_parse(tree))) out.push_back(format_extension(e));
        return out;
    });
    m.def("is_refinement", [](const std::string& p, const std::string& q) {
        return is_refinement(tree_parse(p), tree_parse(q));
    });

    // ---- vertex algebras
    py::class_<VertexAlgebra>(m, "VertexAlgebra")
        .def_static("free_boson", &free_boson, py::arg("weight_cutoff"))
        .def_static("holomorphic", [](int W) { return from_comm_alg(polynomial_algebra(W)); }, py::arg("weight_cutoff"),
                    "Q[t]/(t^(W+1)) with T = d/dt")
        .def_static("parse", &parse_vertex_algebra)
        .def("__str__", &format_vertex_algebra)
        .def_property_readonly("basis", [](const VertexAlgebra& V) { return V.space().basis(); })
        .def_property_readonly("weight_cutoff", &VertexAlgebra::weight_cutoff)
        .def("Y",
             [](const VertexAlgebra& V, const std::string& a, const std::string& b) -> py::object {
                 const LocalizedSeries* e = V.entry(basis_index(V, a), basis_index(V, b));
                 if (!e) return py::none();
                 return py::str(format_terms(*e));
             },
             "Y(a, x) b as text, None when outside the model")
        .def("check_axioms", [](const VertexAlgebra& V) { return report_items(check_axioms(V)); })
        .def("check_quasisymmetry", [](const VertexAlgebra& V) { return report_items(check_quasisymmetry(V)); })
        .def("locality",
             [](const VertexAlgebra& V, const std::string& a, const std::string& b, int n_max) {
                 return check_locality(V, basis_index(V, a), basis_index(V, b), n_max);
             },
             py::arg("a"), py::arg("b"), py::arg("n_max") = 8)
        .def("locality_order", &locality_order, py::arg("n_max") = 8)
        .def("same_table", &same_table);

    // ---- multimaps
    py::class_<SingularMultiMap>(m, "MultiMap")
        .def_static("parse", &parse_multimap)
        .def_static("from_vertex_operator", &from_vertex_operator)
        .def_static("operator_product", &build_ope, py::arg("algebra"), py::arg("n_max"))
        .def_property_readonly("tree", [](const SingularMultiMap& f) { return tree_format(f.tree); })
        .def_property_readonly("arity", &SingularMultiMap::arity)
        .def("__str__", &format_multimap)
        .def("compose", &compose, py::arg("slot"), py::arg("inner"))
        .def("refine", [](const SingularMultiMap& f, const std::string& q) { return refine_map(f, tree_parse(q)); })
        .def("check", [](const SingularMultiMap& f) { return report_items(check_membership(f)); })
        .def("same_as", [](const SingularMultiMap& a, const SingularMultiMap& b) { return compare_maps(a, b).ok(); });

    m.def("algebra_family_check",
          [](const VertexAlgebra& V, int leaves, int height, std::optional<int> n_max) {
              FamilyOptions opt;
              opt.max_leaves = leaves;
              opt.max_height = height;
              opt.n_max = n_max;
              Report r;
              {
                  py::gil_scoped_release release;
                  r = algebra_family_check(V, opt);
              }
              return report_items(r);
          },
          py::arg("algebra"), py::arg("max_leaves") = 3, py::arg("max_height") = 2, py::arg("n_max") = std::nullopt);
}
