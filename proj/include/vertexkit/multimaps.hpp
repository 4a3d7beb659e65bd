#pragma once

#include "vertexkit/report.hpp"
#include "vertexkit/series.hpp"
#include "vertexkit/trees.hpp"
#include "vertexkit/valg.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vertexkit {

enum class Invariance { Node, Full };

// A singular multilinear map indexed by a tree.  table[t] is the image of the
// basis tensor e_t1 (x) ... (x) e_tn as a series in series_vars(); a missing
// tuple is unknown (outside the finite model), not zero.
struct SingularMultiMap {
    Tree tree;
    EdgeVarAssignment vars;
    std::vector<ModulePtr> inputs;
    ModulePtr output;
    std::map<std::vector<int>, LocalizedSeries> table;
    Invariance invariance = Invariance::Full;

    // Variables left behind by partial evaluation.  Each joins the derivative
    // sum of the node whose outgoing variable is named ("" for the root);
    // nullopt once that node is gone.
    std::map<std::string, std::optional<std::string>> params;
    // Edge variables evaluated at zero; they no longer appear in the series.
    std::set<std::string> fixed;

    int arity() const { return int(inputs.size()); }
    std::vector<std::string> series_vars() const;
    const LocalizedSeries* entry(const std::vector<int>& t) const;
    void set_entry(const std::vector<int>& t, LocalizedSeries s);  // embeds into series_vars()
};

SingularMultiMap make_map(const Tree& t, std::vector<ModulePtr> inputs, ModulePtr output,
                          Invariance inv = Invariance::Full);
// Every basis tuple of the given modules, lexicographic.
std::vector<std::vector<int>> basis_tuples(const std::vector<ModulePtr>& mods);

SingularMultiMap identity_map(ModulePtr m);      // on the single-leaf tree
SingularMultiMap vacuum_map(const VertexAlgebra& V);  // on the empty tree
SingularMultiMap unary_map(const VertexAlgebra& V);   // a -> e^{x1 T} a
// f(a (x) b) = e^{x2 T} Y(a, x1 - x2) b on the two-leaf flat tree.
SingularMultiMap from_vertex_operator(const VertexAlgebra& V);
// Y(a, x) b = f(a (x) b) at deep_var = 0 (x2), or Y(b, x) a when deep_var is x1.
VertexAlgebra to_vertex_operator(const SingularMultiMap& f, const std::string& deep_var, int vacuum);
// e^{x3 T} (x1-x2)^-N g(x1-x3, x2-x3), g = (u-v)^N Y(a,u)Y(b,v)c, with N
// the locality order of each pair (a, b), at most n_max.
SingularMultiMap build_ope(const VertexAlgebra& V, int n_max);

Report check_membership(const SingularMultiMap& f);

// g with f plugged into input `slot` (1-based).
SingularMultiMap compose(const SingularMultiMap& g, int slot, const SingularMultiMap& f);
SingularMultiMap refine_map(const SingularMultiMap& f, const Tree& q);
SingularMultiMap vacuum_insert(const SingularMultiMap& f, int slot, const Vec& v);
SingularMultiMap evaluate_partial(const SingularMultiMap& f, const std::map<int, Vec>& slots,
                                  const std::vector<std::string>& zero_vars = {});

// Sets v = 0 where pairs (a, v) become powers of a.
LocalizedSeries specialize_zero(const LocalizedSeries& s, const std::string& v);

// Entrywise comparison within window, one item named `name`.
Report compare_maps(const SingularMultiMap& a, const SingularMultiMap& b, const std::string& name = "same table");

std::string format_multimap(const SingularMultiMap& f);
SingularMultiMap parse_multimap(const std::string& text);

}  // namespace vertexkit
