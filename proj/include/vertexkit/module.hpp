#pragma once

#include "vertexkit/vec.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vertexkit {

// Finite graded module with a T action.  Column j of the T matrix is T·e_j.
class GModule {
public:
    GModule(std::string name, std::vector<std::string> basis, std::vector<int> weights,
            std::vector<Vec> t_columns, std::optional<int> cutoff = std::nullopt);

    // One-dimensional trivial module; the coefficient ring of scalar series.
    static std::shared_ptr<const GModule> scalars();

    const std::string& name() const { return name_; }
    int dim() const { return int(basis_.size()); }
    const std::vector<std::string>& basis() const { return basis_; }
    const std::string& basis_name(int i) const { return basis_.at(i); }
    int weight(int i) const { return weights_.at(i); }
    std::optional<int> cutoff() const { return cutoff_; }
    int index_of(const std::string& basis_name) const;  // -1 if absent
    bool is_scalar() const { return scalar_; }

    const Vec& t_column(int j) const { return t_.at(j); }
    Vec apply_T(const Vec& v) const;
    // T^k / k!
    Vec apply_divided_T(const Vec& v, int k) const;
    bool t_nilpotent_on(const Vec& v) const;

private:
    std::string name_;
    std::vector<std::string> basis_;
    std::vector<int> weights_;
    std::vector<Vec> t_;
    std::optional<int> cutoff_;
    bool scalar_ = false;
};

using ModulePtr = std::shared_ptr<const GModule>;

// The truncated polynomial module span{t^0..t^W}, wt(t^k) = W - k, T = d/dt.
ModulePtr polynomial_module(int W, const std::string& var = "t");

std::string format_vec(const GModule& m, const Vec& v);
Vec parse_vec(const GModule& m, const std::string& s);

}  // namespace vertexkit
