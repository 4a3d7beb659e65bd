#pragma once

#include "vertexkit/report.hpp"
#include "vertexkit/series.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>

namespace vertexkit {

// A vertex algebra given by structure constants.  Y(e_i, x) e_j is stored as a
// series in the variable "x".  With a weight cutoff W the x^n coefficient of
// Y(e_i, x) e_j has weight wt_i + wt_j + n and is known only up to
// n = W - wt_i - wt_j; without one every stored entry is exact, and pairs
// whose product leaves the finite space are marked unknown.
class VertexAlgebra {
public:
    VertexAlgebra(ModulePtr space, int vacuum, std::optional<int> weight_cutoff);

    const GModule& space() const { return *space_; }
    const ModulePtr& space_ptr() const { return space_; }
    int dim() const { return space_->dim(); }
    int vacuum() const { return vacuum_; }
    Vec vacuum_vec() const { return Vec::unit(vacuum_); }
    std::optional<int> weight_cutoff() const { return cutoff_; }
    bool graded() const { return cutoff_.has_value(); }

    const LocalizedSeries* entry(int i, int j) const;  // nullptr when unknown
    void set_entry(int i, int j, LocalizedSeries s);
    void set_unknown(int i, int j);
    LocalizedSeries& mutable_entry(int i, int j);

    // Ceiling on total degree for an identity whose terms have weight
    // `weight` + degree, lowered by `lost`.
    std::optional<int> ceiling_for(int weight, int lost = 0) const;
    int weight_of(const Vec& v) const;  // highest weight present, 0 for zero
    bool t_known(int i) const;          // T e_i lies inside the cutoff

    bool is_holomorphic() const;  // no negative powers anywhere

    std::string name = "V";

private:
    ModulePtr space_;
    int vacuum_;
    std::optional<int> cutoff_;
    std::map<std::pair<int, int>, LocalizedSeries> table_;
};

// Y(a, var) applied to every coefficient of s.  The new variable comes first.
// nullopt when a needed entry is unknown.
std::optional<LocalizedSeries> apply_Y(const VertexAlgebra& V, const Vec& a, const std::string& var,
                                       const LocalizedSeries& s);
// Y(a, var) b as a series in var.
std::optional<LocalizedSeries> Y(const VertexAlgebra& V, const Vec& a, const Vec& b, const std::string& var = "x");

// e^{var T} applied to the coefficients.  A missing var is added first.
LocalizedSeries apply_exp_T(const LocalizedSeries& s, const std::string& var);
// Lowers the total ceiling to c (no-op for nullopt).
LocalizedSeries trim(LocalizedSeries s, std::optional<int> c);

// Free boson Fock space: basis a_{-n1} ... a_{-nk}|0> of weight <= W, written
// "a2a1" for a_{-2}a_{-1}|0> and "vac" for the vacuum.
VertexAlgebra free_boson(int W);

// A commutative algebra with unit and derivation.  Missing products are
// unknown (they leave the finite space).
struct CommDiffAlgebra {
    ModulePtr module;
    int unit = 0;
    std::map<std::pair<int, int>, Vec> product;

    std::optional<Vec> mul(const Vec& a, const Vec& b) const;
};

// Q[t] truncated at degree W, T = d/dt.
CommDiffAlgebra polynomial_algebra(int W);
Report check_comm_alg(const CommDiffAlgebra& A);
bool operator==(const CommDiffAlgebra& a, const CommDiffAlgebra& b);

VertexAlgebra from_comm_alg(const CommDiffAlgebra& A);
CommDiffAlgebra to_comm_alg(const VertexAlgebra& V);

Report check_axioms(const VertexAlgebra& V);
Report check_quasisymmetry(const VertexAlgebra& V);
// Smallest N <= n_max with (x-y)^N [Y(a,x), Y(b,y)] c = 0 for every basis c.
int check_locality(const VertexAlgebra& V, int a, int b, int n_max);
// Both orderings Y(a,x)Y(b,y)c and Y(b,y)Y(a,x)c over variables (x, y).
std::optional<std::pair<LocalizedSeries, LocalizedSeries>> operator_products(const VertexAlgebra& V, int a, int b,
                                                                            int c);
// Largest locality order over all basis pairs, or nullopt when some pair fails.
std::optional<int> locality_order(const VertexAlgebra& V, int n_max);

bool same_table(const VertexAlgebra& a, const VertexAlgebra& b);

std::string format_vertex_algebra(const VertexAlgebra& V);
VertexAlgebra parse_vertex_algebra(const std::string& text);

}  // namespace vertexkit
