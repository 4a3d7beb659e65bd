#pragma once

#include "vertexkit/hopf.hpp"
#include "vertexkit/module.hpp"

#include <climits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace vertexkit {

// Exponent tuple: one entry per declared variable, then one per declared pair.
using Key = std::vector<int>;

// An upper bound on the degree in a set of variables.  The degree of a term
// in S counts its exponents of variables in S plus exponents of pairs lying
// inside S.  The group over all variables is the total-degree ceiling.
struct DegreeBound {
    std::vector<std::string> vars;  // sorted
    int ceiling;
    friend bool operator==(const DegreeBound&, const DegreeBound&) = default;
};

// Truncation window.  Terms outside the upper bounds are unknown, not zero.
// Floors are support bounds: no term below them is ever stored.
struct Window {
    std::optional<int> ceiling;                   // total degree; none = exact
    std::vector<DegreeBound> bounds;              // extra partial-degree ceilings
    std::map<std::string, int> floors;
    std::map<std::pair<std::string, std::string>, int> diff_floors;  // keyed in declared order
};

class LocalizedSeries {
public:
    explicit LocalizedSeries(ModulePtr module = GModule::scalars(), std::vector<std::string> vars = {},
                             std::vector<std::pair<std::string, std::string>> pairs = {});

    const GModule& module() const { return *module_; }
    const ModulePtr& module_ptr() const { return module_; }
    const std::vector<std::string>& vars() const { return vars_; }
    int nvars() const { return int(vars_.size()); }
    int npairs() const { return int(pairs_.size()); }
    const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
    std::pair<std::string, std::string> pair_names(int p) const;
    int var_index(const std::string& v) const;  // -1 if absent
    int pair_index(const std::string& a, const std::string& b, int* sign = nullptr) const;

    const std::map<Key, Vec>& terms() const { return terms_; }
    bool is_zero_rep() const { return terms_.empty(); }
    bool has_symbols() const;

    // Window management.  Adding a bound never discards what the window already
    // excluded; stored terms falling outside the new window are dropped.
    Window window() const;
    void set_window(const Window& w);
    std::optional<int> ceiling() const;
    void set_ceiling(std::optional<int> n);
    void add_bound(std::vector<std::string> vars, int ceiling);
    void set_floor(const std::string& v, int f);
    void set_diff_floor(const std::string& a, const std::string& b, int f);
    bool is_exact() const { return groups_.empty(); }

    // Adds c to the coefficient at key.  Non-negative pair exponents are
    // expanded; terms outside the window are discarded.
    void add_term(Key key, Vec c);
    void add_term(const std::map<std::string, int>& var_exps,
                  const std::map<std::pair<std::string, std::string>, int>& diff_exps, const Vec& c);
    Vec coeff(const Key& key) const;
    Vec coeff(const std::map<std::string, int>& var_exps,
              const std::map<std::pair<std::string, std::string>, int>& diff_exps = {}) const;

    bool in_window(const Key& key) const;
    int degree_in(const Key& key, const std::vector<int>& group) const;

    // Internal view of window groups: var index sets with ceilings.
    struct Group {
        std::vector<int> vars;  // sorted indices
        int ceiling;
    };
    const std::vector<Group>& groups() const { return groups_; }
    const std::vector<std::optional<int>>& floor_vec() const { return floors_; }
    const std::vector<std::optional<int>>& diff_floor_vec() const { return diff_floors_; }
    void add_group(std::vector<int> vars, int ceiling);
    void set_groups(std::vector<Group> g);
    void restrict_to_window();
    Key zero_key() const { return Key(vars_.size() + pairs_.size(), 0); }

    LocalizedSeries& operator+=(const LocalizedSeries& o);
    LocalizedSeries& operator-=(const LocalizedSeries& o);
    LocalizedSeries& operator*=(const Q& c);
    friend LocalizedSeries operator+(LocalizedSeries a, const LocalizedSeries& b) { a += b; return a; }
    friend LocalizedSeries operator-(LocalizedSeries a, const LocalizedSeries& b) { a -= b; return a; }
    friend LocalizedSeries operator*(const Q& c, LocalizedSeries a) { a *= c; return a; }

    // Same variables, pairs, module, window and stored terms.
    bool same_representation(const LocalizedSeries& o) const;

    // Rewrites symbolic terms so that no pair's first variable carries any
    // exponent alongside that pair.  Unique for a single pair.
    void reduce();

    // Re-express over a larger variable/pair list (vars must contain ours).
    LocalizedSeries embed(const std::vector<std::string>& vars,
                          const std::vector<std::pair<std::string, std::string>>& pairs) const;
    // Rename variables (bijective); pair orientation follows the new names' positions.
    LocalizedSeries rename(const std::map<std::string, std::string>& names) const;
    // Drop declared pairs (and variables) with no stored terms using them.
    void prune_declarations();
    LocalizedSeries with_module(ModulePtr m) const;

private:
    void canonical_add(Key key, Vec c);
    void normalize_groups();

    ModulePtr module_;
    std::vector<std::string> vars_;
    std::vector<std::pair<int, int>> pairs_;
    std::map<Key, Vec> terms_;
    std::vector<Group> groups_;
    std::vector<std::optional<int>> floors_;
    std::vector<std::optional<int>> diff_floors_;
};

// Bring two series onto a common variable/pair list.
std::pair<LocalizedSeries, LocalizedSeries> unify(const LocalizedSeries& a, const LocalizedSeries& b);

LocalizedSeries series_constant(ModulePtr m, const Vec& v, std::vector<std::string> vars = {});
LocalizedSeries scalar_monomial(std::vector<std::string> vars, const std::map<std::string, int>& exps,
                                const Q& c = Q(1));

LocalizedSeries series_mul(const LocalizedSeries& a, const LocalizedSeries& b);
LocalizedSeries series_derive(const LocalizedSeries& a, const std::string& v);
// Divided derivative d^k/dv^k / k!.
LocalizedSeries series_derive_divided(const LocalizedSeries& a, const std::string& v, int k);
// T on coefficients; window unchanged.
LocalizedSeries series_apply_T(const LocalizedSeries& a);
LocalizedSeries series_apply_divided_T(const LocalizedSeries& a, int k);
// Linear map on coefficients given by column images in module `to`.
LocalizedSeries series_map_coeffs(const LocalizedSeries& a, ModulePtr to, const std::vector<Vec>& columns);
// Pairs a coefficient vector with a covector given per basis index (result scalar).
LocalizedSeries series_coeff_component(const LocalizedSeries& a, int basis_index);

LocalizedSeries hopf_act(const HopfElement& h, const LocalizedSeries& a);
bool is_invariant(const LocalizedSeries& a);

enum class ReconstructMode { FromFirstSlice, FromSecondSlice };  // d_i0 / d_0i
LocalizedSeries reconstruct_invariant(const LocalizedSeries& a, const std::string& axis, ReconstructMode mode);

LocalizedSeries localize(int k, const std::string& x1, const std::string& x2, ModulePtr m = GModule::scalars(),
                         const Vec& coeff = Vec::unit(0));

// Expands every (x-y)^-j-1 as an iterated Laurent series with `subordinate`
// as the small variable.  The subordinate degree is bounded by sub_cap
// (default: an existing bound on it, else the total ceiling).
LocalizedSeries expand_diff(const LocalizedSeries& a, const std::string& x, const std::string& y,
                            const std::string& subordinate, std::optional<int> sub_cap = std::nullopt);

// One output variable with a sign, as part of a linear image.
struct SignedVar {
    std::string var;
    int sign = 1;
};
struct ShiftSpec {
    std::map<std::string, std::vector<SignedVar>> images;  // first entry is the leading variable
    std::vector<std::string> out_vars;                     // empty: derived
    std::set<std::string> expand_vars;                     // empty: any shift allowed
    std::vector<DegreeBound> bounds;                       // extra output bounds
};
LocalizedSeries shift_vars(const LocalizedSeries& a, const ShiftSpec& spec);

LocalizedSeries restrict_zero(const LocalizedSeries& a, const std::string& v);
LocalizedSeries exp_T(ModulePtr m, const Vec& b, const std::string& v, std::optional<int> ceiling);

// Both iterated expansions along the pair agree within the window, i.e. the
// series lies in the intersection of the two expansion images.
bool regular_along(const LocalizedSeries& g, const std::string& x, const std::string& y, int sub_cap);

// Function-level comparison on the intersection of the two windows.
bool is_zero_within(const LocalizedSeries& a);
bool equal_within(const LocalizedSeries& a, const LocalizedSeries& b);
// Human-readable witness of a nonzero difference, or empty.
std::string difference_witness(const LocalizedSeries& a, const LocalizedSeries& b);

// Replace every variable by zero is not allowed; substitute v -> c*v.
LocalizedSeries scale_var(const LocalizedSeries& a, const std::string& v, const Q& c);

std::string format_window(const LocalizedSeries& a);
std::string format_terms(const LocalizedSeries& a);
std::string format_series(const LocalizedSeries& a);  // header line + terms line
// Parses a term sum.  With empty vars the variables are discovered in order
// of first appearance.
LocalizedSeries parse_series(const std::string& text, ModulePtr m = GModule::scalars(),
                             std::vector<std::string> vars = {});
void parse_window_into(LocalizedSeries& s, const std::string& header);

}  // namespace vertexkit
