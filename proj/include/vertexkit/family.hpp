#pragma once

#include "vertexkit/multimaps.hpp"

#include <map>
#include <optional>
#include <string>

namespace vertexkit {

// The multimaps a vertex algebra assigns to trees: the vacuum on the empty
// tree, the identity on the leaf, e^{xT} on the unary tree, the vertex
// operator on two leaves, the operator product on three.  Larger trees are
// composites of these along their root.
class AlgebraFamily {
public:
    AlgebraFamily(const VertexAlgebra& V, int n_max);

    const SingularMultiMap& at(const Tree& p);
    const VertexAlgebra& algebra() const { return V_; }

private:
    VertexAlgebra V_;
    int n_max_;
    std::map<Tree, SingularMultiMap> memo_;
};

struct FamilyOptions {
    int max_leaves = 3;
    int max_height = 2;
    std::optional<int> n_max;  // default: twice the cutoff, or 4
    int threads = 1;
};

// Items "composition closure", "refinement closure", "unit law",
// "symmetric action" (plus "regular" for holomorphic algebras).
Report algebra_family_check(const VertexAlgebra& V, const FamilyOptions& opt = {});

}  // namespace vertexkit
