#include "vertexkit/multimaps.hpp"

#include "vertexkit/errors.hpp"
#include "vertexkit/text.hpp"

#include <algorithm>
#include <climits>
#include <functional>
#include <sstream>

namespace vertexkit {

namespace {

std::vector<std::pair<std::string, std::string>> pair_list(const LocalizedSeries& s) {
    std::vector<std::pair<std::string, std::string>> out;
    for (int p = 0; p < s.npairs(); ++p) out.push_back(s.pair_names(p));
    return out;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

std::string tuple_name(const SingularMultiMap& f, const std::vector<int>& t) {
    std::string s;
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + f.inputs[i]->basis_name(t[i]);
    return "(" + s + ")";
}

bool same_module(const ModulePtr& a, const ModulePtr& b) {
    return a == b || (a->basis() == b->basis() && a->name() == b->name());
}

// Pairs that carry a nonzero exponent in some stored term.
std::vector<int> used_pairs(const LocalizedSeries& s) {
    std::vector<int> out;
    for (int p = 0; p < s.npairs(); ++p)
        for (const auto& [k, c] : s.terms())
            if (k[s.nvars() + p]) {
                out.push_back(p);
                break;
            }
    return out;
}

LocalizedSeries zero_like(const SingularMultiMap& f) { return LocalizedSeries(f.output, f.series_vars()); }

}  // namespace

std::vector<std::string> SingularMultiMap::series_vars() const {
    std::vector<std::string> out;
    for (const auto& v : vars.all_vars())
        if (!fixed.count(v)) out.push_back(v);
    for (const auto& [p, at] : params) out.push_back(p);
    return out;
}

const LocalizedSeries* SingularMultiMap::entry(const std::vector<int>& t) const {
    auto it = table.find(t);
    return it == table.end() ? nullptr : &it->second;
}

void SingularMultiMap::set_entry(const std::vector<int>& t, LocalizedSeries s) {
    if (int(t.size()) != arity()) fail("IndexOutOfRange", "tuple length does not match the inputs");
    for (int i = 0; i < arity(); ++i)
        if (t[i] < 0 || t[i] >= inputs[i]->dim()) fail("IndexOutOfRange", "basis index outside input module");
    auto sv = series_vars();
    if (s.vars() != sv) {
        for (const auto& v : s.vars())
            if (!contains(sv, v)) fail("UnknownVariable", v + " is not a variable of the map");
        s = s.embed(sv, pair_list(s));
    }
    if (s.module_ptr() != output) s = s.with_module(output);
    table.insert_or_assign(t, std::move(s));
}

SingularMultiMap make_map(const Tree& t, std::vector<ModulePtr> inputs, ModulePtr output, Invariance inv) {
    if (int(inputs.size()) != t.leaves()) fail("InvalidArgument", "one input module per leaf");
    SingularMultiMap f;
    f.tree = t;
    f.vars = assign_vars(t);
    f.inputs = std::move(inputs);
    f.output = std::move(output);
    f.invariance = inv;
    return f;
}

std::vector<std::vector<int>> basis_tuples(const std::vector<ModulePtr>& mods) {
    std::vector<std::vector<int>> out{{}};
    for (const auto& m : mods) {
        std::vector<std::vector<int>> next;
        for (const auto& t : out)
            for (int i = 0; i < m->dim(); ++i) {
                auto u = t;
                u.push_back(i);
                next.push_back(std::move(u));
            }
        out = std::move(next);
    }
    return out;
}

SingularMultiMap identity_map(ModulePtr m) {
    SingularMultiMap f = make_map(Tree::leaf(), {m}, m);
    for (int j = 0; j < m->dim(); ++j) f.set_entry({j}, series_constant(m, Vec::unit(j)));
    return f;
}

SingularMultiMap vacuum_map(const VertexAlgebra& V) {
    SingularMultiMap f = make_map(Tree::empty(), {}, V.space_ptr());
    f.set_entry({}, series_constant(V.space_ptr(), V.vacuum_vec()));
    return f;
}

SingularMultiMap unary_map(const VertexAlgebra& V) {
    SingularMultiMap f = make_map(Tree::flat(1), {V.space_ptr()}, V.space_ptr());
    for (int a = 0; a < V.dim(); ++a)
        f.set_entry({a}, exp_T(V.space_ptr(), Vec::unit(a), "x1", V.ceiling_for(V.space().weight(a))));
    return f;
}

SingularMultiMap from_vertex_operator(const VertexAlgebra& V) {
    if (V.weight_cutoff() && *V.weight_cutoff() < 0) fail("WindowUnderflow", "negative weight cutoff");
    SingularMultiMap f = make_map(Tree::flat(2), {V.space_ptr(), V.space_ptr()}, V.space_ptr());
    for (int a = 0; a < V.dim(); ++a)
        for (int b = 0; b < V.dim(); ++b) {
            const LocalizedSeries* e = V.entry(a, b);
            if (!e) continue;
            LocalizedSeries s(V.space_ptr(), {"x1", "x2"}, {{"x1", "x2"}});
            s.set_ceiling(e->ceiling());
            for (const auto& [k, c] : e->terms()) s.add_term(Key{0, 0, k[0]}, c);
            f.set_entry({a, b}, apply_exp_T(s, "x2"));
        }
    return f;
}

VertexAlgebra to_vertex_operator(const SingularMultiMap& f, const std::string& deep_var, int vacuum) {
    if (f.tree != Tree::flat(2) || !f.params.empty() || !f.fixed.empty())
        fail("InvalidArgument", "expected a two-leaf flat map");
    if (f.invariance != Invariance::Full) fail("NotInvariant", "vertex operators come from invariant maps");
    if (deep_var != "x1" && deep_var != "x2") fail("UnknownVariable", deep_var);
    if (!same_module(f.inputs[0], f.output) || !same_module(f.inputs[1], f.output))
        fail("ModuleMismatch", "inputs and output must be one space");
    const std::string other = deep_var == "x1" ? "x2" : "x1";
    VertexAlgebra V(f.output, vacuum, f.output->cutoff());
    std::set<std::pair<int, int>> seen;
    for (const auto& [t, s] : f.table) {
        LocalizedSeries e = used_pairs(s).empty() ? s : expand_diff(s, "x1", "x2", deep_var);
        e = restrict_zero(e, deep_var).rename({{other, "x"}});
        auto key = deep_var == "x2" ? std::make_pair(t[0], t[1]) : std::make_pair(t[1], t[0]);
        V.set_entry(key.first, key.second, e);
        seen.insert(key);
    }
    for (int i = 0; i < V.dim(); ++i)
        for (int j = 0; j < V.dim(); ++j)
            if (!seen.count({i, j})) V.set_unknown(i, j);
    return V;
}

LocalizedSeries specialize_zero(const LocalizedSeries& s, const std::string& v) {
    const int i = s.var_index(v);
    if (i < 0) fail("UnknownVariable", v);
    const int n = s.nvars();
    std::vector<std::string> vars;
    for (int j = 0; j < n; ++j)
        if (j != i) vars.push_back(s.vars()[j]);
    auto out_index = [&](int j) { return j > i ? j - 1 : j; };
    std::vector<int> keep;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<int> used(s.npairs(), 0);
    for (const auto& [k, c] : s.terms())
        for (int p = 0; p < s.npairs(); ++p)
            if (k[n + p]) used[p] = 1;
    for (int p = 0; p < s.npairs(); ++p) {
        auto [a, b] = s.pairs()[p];
        if (a != i && b != i) {
            keep.push_back(p);
            pairs.push_back(s.pair_names(p));
            continue;
        }
        if (!used[p]) continue;
        int other = a == i ? b : a;
        for (const auto& g : s.groups()) {
            bool hv = std::binary_search(g.vars.begin(), g.vars.end(), i);
            bool ho = std::binary_search(g.vars.begin(), g.vars.end(), other);
            if (hv != ho) fail("IncompatibleWindows", "degree bound separates " + v + " from its pair partner");
        }
    }
    LocalizedSeries out(s.module_ptr(), vars, pairs);
    std::vector<LocalizedSeries::Group> groups;
    for (const auto& g : s.groups()) {
        std::vector<int> og;
        for (int u : g.vars)
            if (u != i) og.push_back(out_index(u));
        groups.push_back({og, g.ceiling});
    }
    out.set_groups(groups);
    for (const auto& [k, c] : s.terms()) {
        if (k[i] > 0) continue;
        if (k[i] < 0) fail("SingularAtZero", "negative power of " + v);
        Key kk(out.zero_key());
        for (int j = 0; j < n; ++j)
            if (j != i) kk[out_index(j)] = k[j];
        Q sign(1);
        for (int p = 0, r = 0; p < s.npairs(); ++p) {
            int e = k[n + p];
            auto [a, b] = s.pairs()[p];
            if (a != i && b != i) {
                kk[out.nvars() + r++] = e;
                continue;
            }
            if (!e) continue;
            // (a - 0)^e = a^e, (0 - b)^e = (-1)^e b^e
            if (a == i && (e % 2)) sign = -sign;
            kk[out_index(a == i ? b : a)] += e;
        }
        out.add_term(kk, sign * c);
    }
    out.reduce();
    return out;
}

SingularMultiMap build_ope(const VertexAlgebra& V, int n_max) {
    const auto& m = V.space();
    SingularMultiMap f = make_map(Tree::flat(3), {V.space_ptr(), V.space_ptr(), V.space_ptr()}, V.space_ptr());
    auto alone = [](const LocalizedSeries& s, int var) -> std::optional<int> {
        for (const auto& g : s.groups())
            if (g.vars == std::vector<int>{var}) return g.ceiling;
        return std::nullopt;
    };
    std::map<std::pair<int, int>, int> orders;
    for (int a = 0; a < V.dim(); ++a)
        for (int b = 0; b < V.dim(); ++b)
            for (int c = 0; c < V.dim(); ++c) {
                auto prods = operator_products(V, a, b, c);
                if (!prods) continue;
                const auto& [p1, p2] = *prods;
                // One order per pair: the narrow overlap of two truncated
                // products can vanish before the commutator really does.
                auto [it, fresh] = orders.try_emplace({a, b}, 0);
                if (fresh) {
                    try {
                        it->second = check_locality(V, a, b, n_max);
                    } catch (const Error& e) {
                        if (e.kind() != "NotLocalWithin") throw;
                        fail("LocalityOrderTooSmall", "(" + m.basis_name(a) + ", " + m.basis_name(b) +
                                                          ") needs more than N=" + std::to_string(n_max));
                    }
                }
                const int n = it->second;
                LocalizedSeries g1 = series_mul(localize(n, "x", "y"), p1);
                LocalizedSeries g2 = series_mul(localize(n, "x", "y"), p2);
                // g1 knows small y-degree, g2 small x-degree; together they
                // cover every total degree up to cap_x + cap_y + 1.
                std::optional<int> top;
                auto lower = [&](std::optional<int> c) {
                    if (c) top = top ? std::min(*top, *c) : *c;
                };
                lower(g1.ceiling());
                lower(g2.ceiling());
                auto cy = alone(g1, 1), cx = alone(g2, 0);
                if (cx && cy) lower(*cx + *cy + 1);
                else if (cx || cy) fail("IncompatibleWindows", "one-sided degree bound in an operator product");

                LocalizedSeries s(V.space_ptr(), {"x1", "x2", "x3"}, {{"x1", "x2"}, {"x1", "x3"}, {"x2", "x3"}});
                if (top) s.set_ceiling(*top - n);
                auto place = [&](const Key& k, const Vec& v) {
                    if (top && k[0] + k[1] > *top) return;
                    s.add_term(Key{0, 0, 0, -n, k[0], k[1]}, v);
                };
                for (const auto& [k, v] : g1.terms()) place(k, v);
                for (const auto& [k, v] : g2.terms())
                    if (!g1.in_window(k)) place(k, v);
                s.reduce();
                f.set_entry({a, b, c}, apply_exp_T(s, "x3"));
            }
    return f;
}

// ---------------------------------------------------------------------------
// membership

namespace {

void compare_into(Report& r, const std::string& name, const std::string& where,
                  const std::optional<LocalizedSeries>& a, const std::optional<LocalizedSeries>& b) {
    if (!a || !b) {
        r.skip(name);
        return;
    }
    bool ok;
    std::string detail;
    try {
        ok = equal_within(*a, *b);
        if (!ok) detail = difference_witness(*a, *b);
    } catch (const Error& e) {
        ok = false;
        detail = e.what();
    }
    r.record(name, ok, ok ? std::string{} : where + ": " + detail);
}

// Sum of derivatives along `vars`; nullopt when one of them is not in the series.
std::optional<LocalizedSeries> derivative_sum(const LocalizedSeries& s, const std::vector<std::string>& vars) {
    LocalizedSeries acc(s.module_ptr(), s.vars());
    for (const auto& v : vars) {
        if (s.var_index(v) < 0) return std::nullopt;
        acc += series_derive(s, v);
    }
    return acc;
}

// The pole order of a pair may depend only on the inputs in `scope`.  A
// truncated entry can hide a pole, so only exact entries take part.
void check_scope(Report& r, const std::string& name, const SingularMultiMap& f, const std::string& a,
                 const std::string& b, const std::vector<int>& scope) {
    std::map<std::vector<int>, std::pair<int, std::vector<int>>> seen;
    for (const auto& [t, s] : f.table) {
        if (s.terms().empty()) continue;
        if (!s.is_exact()) {
            r.skip(name);
            continue;
        }
        int order = 0;
        int p = s.pair_index(a, b);
        if (p >= 0)
            for (const auto& [k, c] : s.terms()) order = std::max(order, -k[s.nvars() + p]);
        std::vector<int> in;
        for (int i : scope) in.push_back(t[i - 1]);
        auto [it, fresh] = seen.emplace(in, std::make_pair(order, t));
        if (fresh) continue;
        bool ok = it->second.first == order;
        r.record(name, ok,
                 ok ? std::string{}
                    : "pair (" + a + "," + b + ") order " + std::to_string(it->second.first) + " at " +
                          tuple_name(f, it->second.second) + " but " + std::to_string(order) + " at " +
                          tuple_name(f, t));
    }
}

}  // namespace

Report check_membership(const SingularMultiMap& f) {
    Report r;
    const auto sv = f.series_vars();
    auto allowed = allowed_singularities(f.tree, f.vars);
    auto is_allowed = [&](std::string a, std::string b) {
        for (const auto& ap : allowed)
            if ((ap.a == a && ap.b == b) || (ap.a == b && ap.b == a)) return true;
        return false;
    };
    for (const auto& [t, s] : f.table) {
        r.record("variables", s.vars() == sv, tuple_name(f, t));
        for (int p : used_pairs(s)) {
            auto [a, b] = s.pair_names(p);
            if (f.params.count(a) || f.params.count(b)) {
                r.skip("allowed singularities");
                continue;
            }
            r.record("allowed singularities", is_allowed(a, b), tuple_name(f, t) + ": (" + a + "-" + b + ")");
        }
    }

    // Dependence scopes, once per linear extension: a node's singularities
    // may see its own inputs and those of every node ordered after it.
    if (f.params.empty()) {
        std::map<std::string, const NodeVars*> by_letter;
        for (const auto& n : f.vars.nodes) by_letter[n.letter] = &n;
        for (const auto& ext : linear_extensions(f.tree)) {
            const std::string name = "scope " + format_extension(ext);
            r.item(name);
            for (std::size_t i = 1; i < ext.size(); ++i) {
                const NodeVars* n = by_letter.at(ext[i]);
                if (n->incoming.size() < 2) continue;
                std::set<int> scope(n->leaves.begin(), n->leaves.end());
                for (std::size_t j = i + 1; j < ext.size(); ++j)
                    for (int l : by_letter.at(ext[j])->leaves) scope.insert(l);
                std::vector<int> sc(scope.begin(), scope.end());
                for (std::size_t u = 0; u < n->incoming.size(); ++u)
                    for (std::size_t w = u + 1; w < n->incoming.size(); ++w)
                        check_scope(r, name, f, n->incoming[u], n->incoming[w], sc);
            }
        }
    }

    // T on an input slot is the derivative along that leaf's variable.
    for (int i = 0; i < f.arity(); ++i) {
        const std::string lv = f.vars.leaf_vars.at(i);
        const GModule& m = *f.inputs[i];
        const std::string name = "leaf T-equation";
        for (const auto& [t, s] : f.table) {
            const int j = t[i];
            if ((m.cutoff() && m.weight(j) + 1 > *m.cutoff()) || f.fixed.count(lv)) {
                r.skip(name);
                continue;
            }
            std::optional<LocalizedSeries> lhs = LocalizedSeries(f.output, sv);
            for (const auto& [l, c] : m.t_column(j).entries()) {
                auto u = t;
                u[i] = l;
                const LocalizedSeries* e = f.entry(u);
                if (!e) {
                    lhs.reset();
                    break;
                }
                *lhs += c * *e;
            }
            std::optional<LocalizedSeries> rhs =
                lv.empty() ? series_apply_T(s) : series_derive(s, lv);
            compare_into(r, name, "slot " + std::to_string(i + 1) + " at " + tuple_name(f, t), lhs, rhs);
        }
    }

    // Sum of incoming derivatives equals the outgoing derivative.
    auto attached = [&](const std::string& out) {
        std::vector<std::string> ps;
        for (const auto& [p, at] : f.params)
            if (at && *at == out) ps.push_back(p);
        return ps;
    };
    for (const auto& n : f.vars.nodes) {
        if (n.outgoing.empty()) continue;
        const std::string name = "node " + n.letter;
        std::vector<std::string> in = n.incoming;
        for (const auto& p : attached(n.outgoing)) in.push_back(p);
        for (const auto& [t, s] : f.table) {
            if (f.fixed.count(n.outgoing)) {
                r.skip(name);
                continue;
            }
            compare_into(r, name, tuple_name(f, t), derivative_sum(s, in), series_derive(s, n.outgoing));
        }
    }

    if (f.invariance == Invariance::Full && !f.tree.is_leaf()) {
        std::vector<std::string> root = f.vars.root_vars();
        for (const auto& p : attached("")) root.push_back(p);
        const GModule& out = *f.output;
        for (const auto& [t, s] : f.table) {
            // T of a top-weight coefficient was cut off; derivatives already
            // lower the window past it.
            std::optional<LocalizedSeries> lhs = series_apply_T(s);
            if (root.empty() && out.cutoff())
                for (const auto& [k, c] : s.terms())
                    for (const auto& [b, x] : c.entries())
                        if (out.weight(b) + 1 > *out.cutoff()) lhs.reset();
            compare_into(r, "invariance", tuple_name(f, t), lhs, derivative_sum(s, root));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// grafting operations

namespace {

std::vector<int> indices_of(const LocalizedSeries& s, const std::vector<std::string>& names) {
    std::vector<int> out;
    for (const auto& v : names) {
        int i = s.var_index(v);
        if (i >= 0) out.push_back(i);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void require_plain(const SingularMultiMap& f, const std::string& op) {
    if (!f.params.empty() || !f.fixed.empty())
        fail("InvalidArgument", op + " needs a map without evaluated variables");
}

// Combination sum_c v_c f(..., e_c at slot, ...) for one tuple of the others.
std::optional<LocalizedSeries> fill_slot(const SingularMultiMap& f, int slot, const std::vector<int>& rest,
                                         const Vec& v) {
    std::optional<LocalizedSeries> acc = zero_like(f);
    for (const auto& [c, x] : v.entries()) {
        auto t = rest;
        t.insert(t.begin() + (slot - 1), c);
        const LocalizedSeries* e = f.entry(t);
        if (!e) return std::nullopt;
        *acc += x * *e;
    }
    return acc;
}

std::vector<ModulePtr> without(const std::vector<ModulePtr>& v, int slot) {
    auto out = v;
    out.erase(out.begin() + (slot - 1));
    return out;
}

// Removes one slot by grafting the empty tree there.  `value` gives each
// remaining entry; vanished edge variables are handled by `vanish`, which
// returns the replacement name or nullopt to restrict the variable to zero.
SingularMultiMap drop_slot(const SingularMultiMap& f, int slot, const Vec& v,
                           const std::function<std::optional<std::string>(const std::string&)>& vanish,
                           const std::string& residual_kind) {
    if (slot < 1 || slot > f.arity()) fail("IndexOutOfRange", "slot " + std::to_string(slot));
    GraftResult gr = graft_tracked(f.tree, {{slot, Tree::empty()}});
    SingularMultiMap out = make_map(gr.tree, without(f.inputs, slot), f.output, f.invariance);

    std::map<std::string, std::string> rename;
    std::vector<std::string> restrict;
    for (const auto& var : f.vars.all_vars()) {
        auto it = gr.outer_vars.find(var);
        if (it != gr.outer_vars.end()) {
            if (f.fixed.count(var)) out.fixed.insert(it->second);
            else rename[var] = it->second;
            continue;
        }
        if (f.fixed.count(var)) continue;
        if (auto p = vanish(var)) {
            rename[var] = *p;
            const NodeVars* owner = f.vars.owner_of(var);
            std::optional<std::string> at;
            if (owner->outgoing.empty()) at = "";
            else if (auto jt = gr.outer_vars.find(owner->outgoing); jt != gr.outer_vars.end()) at = jt->second;
            out.params[*p] = at;
        } else {
            restrict.push_back(var);
        }
    }
    for (const auto& [p, at] : f.params) {
        rename[p] = p;
        std::optional<std::string> nat;
        if (at && at->empty()) nat = "";
        else if (at)
            if (auto jt = gr.outer_vars.find(*at); jt != gr.outer_vars.end()) nat = jt->second;
        out.params[p] = nat;
    }

    std::vector<ModulePtr> rest_mods = out.inputs;
    for (const auto& t : basis_tuples(rest_mods)) {
        auto s = fill_slot(f, slot, t, v);
        if (!s) continue;
        LocalizedSeries e = *s;
        for (const auto& var : restrict) {
            try {
                e = restrict_zero(e, var);
            } catch (const Error& err) {
                if (err.kind() != "SingularAtZero") throw;
                fail(residual_kind, "entry " + tuple_name(out, t) + " still depends singularly on " + var);
            }
        }
        out.set_entry(t, e.rename(rename));
    }
    return out;
}

}  // namespace

SingularMultiMap vacuum_insert(const SingularMultiMap& f, int slot, const Vec& v) {
    if (slot < 1 || slot > f.arity()) fail("IndexOutOfRange", "slot " + std::to_string(slot));
    const GModule& m = *f.inputs[slot - 1];
    if (!m.apply_T(v).empty()) fail("NotVacuum", "T does not annihilate " + format_vec(m, v));
    for (const auto& [i, c] : v.entries())
        if (m.cutoff() && m.weight(i) + 1 > *m.cutoff())
            fail("NotVacuum", "T of " + m.basis_name(i) + " lies outside the cutoff");
    return drop_slot(
        f, slot, v, [](const std::string&) { return std::optional<std::string>(); }, "ResidualSingularity");
}

SingularMultiMap evaluate_partial(const SingularMultiMap& f, const std::map<int, Vec>& slots,
                                  const std::vector<std::string>& zero_vars) {
    SingularMultiMap cur = f;
    for (const auto& z : zero_vars) {
        if (!contains(cur.vars.all_vars(), z) || cur.fixed.count(z)) fail("UnknownVariable", z);
        for (const auto& [t, s] : cur.table)
            for (int p : used_pairs(s)) {
                auto [a, b] = s.pair_names(p);
                if (a == z || b == z)
                    fail("EvalAtLocalizedSlot", "(" + a + "-" + b + ") is localized at " + z + " in entry " +
                                                    tuple_name(cur, t));
            }
        SingularMultiMap next = cur;
        next.fixed.insert(z);
        next.table.clear();
        for (const auto& [t, s] : cur.table) next.set_entry(t, restrict_zero(s, z));
        cur = std::move(next);
    }
    std::set<std::string> taken;
    for (const auto& [p, at] : cur.params) taken.insert(p);
    for (auto it = slots.rbegin(); it != slots.rend(); ++it) {
        auto fresh = [&](const std::string& var) -> std::optional<std::string> {
            std::string name = "e" + var;
            for (int k = 2; taken.count(name); ++k) name = "e" + var + "_" + std::to_string(k);
            taken.insert(name);
            return name;
        };
        cur = drop_slot(cur, it->first, it->second, fresh, "InvalidArgument");
    }
    return cur;
}

SingularMultiMap compose(const SingularMultiMap& g, int slot, const SingularMultiMap& f) {
    if (slot < 1 || slot > g.arity()) fail("IndexOutOfRange", "slot " + std::to_string(slot));
    if (!same_module(f.output, g.inputs[slot - 1]))
        fail("ModuleMismatch", "inner output " + f.output->name() + " does not feed input " + std::to_string(slot) +
                                   " (" + g.inputs[slot - 1]->name() + ")");
    if (f.tree.is_leaf()) return g;
    if (f.invariance != Invariance::Full) fail("NotInvariantInner", "the inner map must be fully invariant");
    require_plain(g, "compose");
    require_plain(f, "compose");
    if (f.tree.is_empty()) return vacuum_insert(g, slot, f.table.at({}).coeff(Key{}));

    GraftResult gr = graft_tracked(g.tree, {{slot, f.tree}});
    std::vector<ModulePtr> ins;
    for (int i = 0; i < g.arity(); ++i) {
        if (i == slot - 1) ins.insert(ins.end(), f.inputs.begin(), f.inputs.end());
        else ins.push_back(g.inputs[i]);
    }
    SingularMultiMap out = make_map(gr.tree, ins, g.output, g.invariance);
    const auto vars = out.series_vars();
    std::vector<std::string> inner_names;
    for (const auto& [o, n] : gr.inner_vars[0]) inner_names.push_back(n);

    // Inner entries, split by output component and moved to the new names.
    struct Split {
        LocalizedSeries whole;
        std::map<int, LocalizedSeries> parts;
    };
    std::map<std::vector<int>, Split> inner;
    for (const auto& [t, s] : f.table) {
        LocalizedSeries w = s.rename(gr.inner_vars[0]);
        w = w.embed(vars, pair_list(w));
        Split sp{w, {}};
        std::set<int> comps;
        for (const auto& [k, c] : w.terms())
            for (const auto& [b, x] : c.entries()) comps.insert(b);
        for (int b : comps) sp.parts.emplace(b, series_coeff_component(w, b));
        inner.emplace(t, std::move(sp));
    }
    std::map<std::vector<int>, LocalizedSeries> outer;
    for (const auto& [t, s] : g.table) {
        LocalizedSeries w = s.rename(gr.outer_vars);
        outer.emplace(t, w.embed(vars, pair_list(w)));
    }

    bool any_product = false, any_result = false;
    for (const auto& [ft, sp] : inner)
        for (const auto& gt : basis_tuples(without(g.inputs, slot))) {
            std::vector<int> t = gt;
            t.insert(t.begin() + (slot - 1), ft.begin(), ft.end());
            LocalizedSeries acc(g.output, vars);
            acc.set_groups(sp.whole.groups());
            bool known = true;
            for (const auto& [k, fk] : sp.parts) {
                auto u = gt;
                u.insert(u.begin() + (slot - 1), k);
                auto it = outer.find(u);
                if (it == outer.end()) {
                    known = false;
                    break;
                }
                const LocalizedSeries& gk = it->second;
                LocalizedSeries prod = series_mul(fk, gk);
                if (!prod.terms().empty()) any_product = true;
                // Outer bounds widen over the inner variables by the lowest
                // inner degree feeding this component, which keeps weight
                // gradings intact.
                auto inner_idx = indices_of(prod, inner_names);
                long lo = LONG_MAX;
                for (const auto& [key, c] : fk.terms()) lo = std::min<long>(lo, fk.degree_in(key, inner_idx));
                std::vector<LocalizedSeries::Group> groups = fk.groups();
                for (const auto& gg : gk.groups()) {
                    std::vector<int> gv = gg.vars;
                    gv.insert(gv.end(), inner_idx.begin(), inner_idx.end());
                    groups.push_back({gv, int(gg.ceiling + lo)});
                }
                prod.set_groups(groups);
                acc += prod;
            }
            if (!known) continue;
            if (!acc.terms().empty()) any_result = true;
            out.set_entry(t, acc);
        }
    if (any_product && !any_result) fail("WindowUnderflow", "no coefficient of the composite lies in the window");
    return out;
}

// ---------------------------------------------------------------------------
// refinement

namespace {

// Chain position: how many strict ancestors share the node's leaf set.
int chain_position(const EdgeVarAssignment& a, const NodeVars& n) {
    int k = 0;
    for (std::size_t len = 0; len < n.path.size(); ++len) {
        NodePath pre(n.path.begin(), n.path.begin() + len);
        if (a.find(pre)->leaves == n.leaves) ++k;
    }
    return k;
}

}  // namespace

SingularMultiMap refine_map(const SingularMultiMap& f, const Tree& q) {
    if (!is_refinement(f.tree, q))
        fail("NotARefinement", tree_format(f.tree) + " is not a refinement of " + tree_format(q));
    require_plain(f, "refine_map");
    if (f.tree == q) return f;
    const EdgeVarAssignment& P = f.vars;
    const EdgeVarAssignment Qa = assign_vars(q);

    std::map<std::vector<int>, std::vector<const NodeVars*>> chains;
    for (const auto& n : Qa.nodes) chains[n.leaves].push_back(&n);
    for (auto& [l, c] : chains)
        std::sort(c.begin(), c.end(), [](auto* a, auto* b) { return a->path.size() < b->path.size(); });
    auto match = [&](const NodeVars& n) {
        const auto& c = chains.at(n.leaves);
        return c[std::min<std::size_t>(chain_position(P, n), c.size() - 1)]->path;
    };
    // Each p-edge is the offset between its endpoints, which in q is the sum
    // of the edges on the path between the matched endpoints.
    std::map<std::string, std::vector<SignedVar>> images;
    for (const auto& n : P.nodes) {
        NodePath top = match(n);
        for (std::size_t i = 0; i < n.incoming.size(); ++i) {
            const std::string& v = n.incoming[i];
            NodePath bottom;
            auto lit = std::find(P.leaf_vars.begin(), P.leaf_vars.end(), v);
            if (lit != P.leaf_vars.end()) {
                int ci = 0;
                const NodeVars* qn = Qa.owner_of(Qa.leaf_vars[lit - P.leaf_vars.begin()], &ci);
                bottom = qn->path;
                bottom.push_back(ci);
            } else {
                NodePath cp = n.path;
                cp.push_back(int(i));
                bottom = match(*P.find(cp));
            }
            if (bottom.size() < top.size() || !std::equal(top.begin(), top.end(), bottom.begin()))
                fail("NotARefinement", "edge " + v + " has no path in " + tree_format(q));
            std::vector<SignedVar> img;
            for (std::size_t s = top.size(); s < bottom.size(); ++s) {
                NodePath pre(bottom.begin(), bottom.begin() + s);
                img.push_back({Qa.find(pre)->incoming[bottom[s]], 1});
            }
            images[v] = img;
        }
    }

    SingularMultiMap out = make_map(q, f.inputs, f.output, f.invariance);
    const auto qvars = Qa.all_vars();
    int max_depth = 1;
    for (const auto& n : Qa.nodes) max_depth = std::max(max_depth, n.depth);

    auto core_of = [&](const std::string& a, const std::string& b) -> std::pair<std::string, std::string> {
        const auto& ia = images.at(a);
        const auto& ib = images.at(b);
        std::size_t t = 0;
        while (t < ia.size() && t < ib.size() && ia[t].var == ib[t].var) ++t;
        if (t < ia.size() && t < ib.size()) return {ia[t].var, ib[t].var};
        return {};
    };

    for (const auto& [t, s0] : f.table) {
        LocalizedSeries s = s0;
        for (const auto& [v, img] : images)
            if (img.empty() && s.var_index(v) >= 0) s = restrict_zero(s, v);
        ShiftSpec spec;
        spec.out_vars = qvars;
        for (const auto& v : s.vars()) spec.images[v] = images.at(v);

        // Partial bounds move to the union of their images when no negative
        // exponent from outside can leak into that union.
        for (const auto& g : s.groups()) {
            if (int(g.vars.size()) == s.nvars()) continue;
            std::set<std::string> J;
            std::set<int> gamma(g.vars.begin(), g.vars.end());
            for (int v : g.vars)
                for (const auto& sv : images.at(s.vars()[v])) J.insert(sv.var);
            bool sound = true;
            for (const auto& [k, c] : s.terms()) {
                for (int v = 0; v < s.nvars(); ++v)
                    if (k[v] < 0 && !gamma.count(v))
                        for (const auto& sv : images.at(s.vars()[v]))
                            if (J.count(sv.var)) sound = false;
                for (int p = 0; p < s.npairs(); ++p) {
                    auto [a, b] = s.pairs()[p];
                    if (k[s.nvars() + p] >= 0 || (gamma.count(a) && gamma.count(b))) continue;
                    auto [ca, cb] = core_of(s.vars()[a], s.vars()[b]);
                    if (J.count(ca) && J.count(cb)) sound = false;
                }
            }
            if (!sound) fail("WindowUnderflow", "a partial degree bound cannot be carried to " + tree_format(q));
            spec.bounds.push_back({std::vector<std::string>(J.begin(), J.end()), g.ceiling});
        }
        // Expanding a shifted difference needs a bound on the deeper
        // variables; this one keeps everything up to the total ceiling.
        if (!used_pairs(s).empty() && !s.groups().empty()) {
            int top = INT_MIN;
            for (const auto& g : s.groups()) top = std::max(top, g.ceiling);
            int poles = 0;
            for (const auto& [k, c] : s.terms()) {
                int d = 0;
                for (int e : k) d += std::max(0, -e);
                poles = std::max(poles, d);
            }
            for (int d = 2; d <= max_depth; ++d) {
                std::vector<std::string> deep;
                for (const auto& v : qvars)
                    if (Qa.depth_of(v) >= d) deep.push_back(v);
                std::sort(deep.begin(), deep.end());
                spec.bounds.push_back({deep, top + poles});
            }
        }
        out.set_entry(t, shift_vars(s, spec));
    }
    return out;
}

// ---------------------------------------------------------------------------

Report compare_maps(const SingularMultiMap& a, const SingularMultiMap& b, const std::string& name) {
    Report r;
    r.item(name);
    if (a.tree != b.tree || a.arity() != b.arity()) {
        r.record(name, false, "trees " + tree_format(a.tree) + " and " + tree_format(b.tree));
        return r;
    }
    std::set<std::vector<int>> keys;
    for (const auto& [t, s] : a.table) keys.insert(t);
    for (const auto& [t, s] : b.table) keys.insert(t);
    for (const auto& t : keys) {
        const LocalizedSeries* x = a.entry(t);
        const LocalizedSeries* y = b.entry(t);
        compare_into(r, name, tuple_name(a, t), x ? std::optional<LocalizedSeries>(*x) : std::nullopt,
                     y ? std::optional<LocalizedSeries>(*y) : std::nullopt);
    }
    return r;
}

// ---------------------------------------------------------------------------
// text format

std::string format_multimap(const SingularMultiMap& f) {
    std::ostringstream os;
    os << "multimap\n";
    os << "tree " << tree_format(f.tree) << "\n";
    os << "invariance " << (f.invariance == Invariance::Full ? "full" : "node") << "\n";
    std::vector<ModulePtr> mods;
    auto note = [&](const ModulePtr& m) {
        for (const auto& x : mods)
            if (x->name() == m->name()) return;
        mods.push_back(m);
    };
    for (const auto& m : f.inputs) note(m);
    note(f.output);
    for (const auto& m : mods) {
        os << "module " << m->name() << " cutoff " << (m->cutoff() ? std::to_string(*m->cutoff()) : "none")
           << "\n";
        for (int i = 0; i < m->dim(); ++i) os << "basis " << m->basis_name(i) << " " << m->weight(i) << "\n";
        for (int i = 0; i < m->dim(); ++i)
            if (!m->t_column(i).empty())
                os << "T " << m->basis_name(i) << " -> " << format_vec(*m, m->t_column(i)) << "\n";
        os << "end\n";
    }
    for (const auto& m : f.inputs) os << "input " << m->name() << "\n";
    os << "output " << f.output->name() << "\n";
    os << "vars";
    for (const auto& v : f.series_vars()) os << " " << v;
    os << "\n";
    for (const auto& [p, at] : f.params) os << "param " << p << " " << (!at ? "-" : at->empty() ? "root" : *at) << "\n";
    for (const auto& v : f.fixed) os << "fixed " << v << "\n";
    for (const auto& [t, s] : f.table) {
        os << "entry";
        for (std::size_t i = 0; i < t.size(); ++i) os << " " << f.inputs[i]->basis_name(t[i]);
        os << " | " << format_window(s) << " | " << format_terms(s) << "\n";
    }
    return os.str();
}

SingularMultiMap parse_multimap(const std::string& textv) {
    std::istringstream is(textv);
    std::string line;
    int lineno = 0;
    auto bad = [&](const std::string& what) { fail("ParseError", "line " + std::to_string(lineno) + ": " + what); };

    std::optional<Tree> tree;
    Invariance inv = Invariance::Full;
    std::map<std::string, ModulePtr> mods;
    std::vector<std::string> input_names;
    std::string output_name;
    std::map<std::string, std::optional<std::string>> params;
    std::set<std::string> fixed;
    std::vector<std::pair<int, std::string>> entries;

    struct Block {
        std::string name;
        std::optional<int> cutoff;
        std::vector<std::string> basis;
        std::vector<int> weights;
        std::vector<std::pair<std::string, std::string>> t;
    };
    std::optional<Block> block;
    auto close = [&] {
        Block& b = *block;
        auto proto = std::make_shared<GModule>(b.name, b.basis, b.weights, std::vector<Vec>(b.basis.size()));
        std::vector<Vec> cols(b.basis.size());
        for (const auto& [a, rhs] : b.t) {
            int i = proto->index_of(a);
            if (i < 0) bad("unknown basis vector '" + a + "'");
            cols[i] = parse_vec(*proto, rhs);
        }
        mods[b.name] = std::make_shared<GModule>(b.name, b.basis, b.weights, cols, b.cutoff);
        block.reset();
    };

    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        auto t = text::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ls(t);
        std::string word;
        ls >> word;
        if (block) {
            if (word == "end") {
                close();
            } else if (word == "basis") {
                std::string b;
                int w;
                if (!(ls >> b >> w)) bad("expected 'basis NAME WEIGHT'");
                block->basis.push_back(b);
                block->weights.push_back(w);
            } else if (word == "T") {
                auto arrow = t.find("->");
                if (arrow == std::string::npos) bad("missing '->'");
                std::string a;
                std::istringstream(t.substr(1, arrow - 1)) >> a;
                block->t.push_back({a, text::trim(t.substr(arrow + 2))});
            } else {
                bad("unexpected '" + word + "' inside a module block");
            }
            continue;
        }
        if (word == "multimap") {
            header = true;
        } else if (word == "tree") {
            std::string s;
            ls >> s;
            try {
                tree = tree_parse(s);
            } catch (const Error& e) {
                bad(e.what());
            }
        } else if (word == "invariance") {
            std::string s;
            ls >> s;
            if (s == "full") inv = Invariance::Full;
            else if (s == "node") inv = Invariance::Node;
            else bad("invariance is 'full' or 'node'");
        } else if (word == "module") {
            Block b;
            std::string kw, c;
            ls >> b.name >> kw >> c;
            long v;
            if (kw != "cutoff") bad("expected 'module NAME cutoff N|none'");
            if (c != "none") {
                if (!text::parse_int(c, v)) bad("bad cutoff '" + c + "'");
                b.cutoff = int(v);
            }
            block = b;
        } else if (word == "input") {
            std::string s;
            ls >> s;
            input_names.push_back(s);
        } else if (word == "output") {
            ls >> output_name;
        } else if (word == "vars") {
            // informational; recomputed from the tree and the params
        } else if (word == "param") {
            std::string p, at;
            if (!(ls >> p >> at)) bad("expected 'param NAME NODE'");
            params[p] = at == "-" ? std::nullopt : std::optional<std::string>(at == "root" ? "" : at);
        } else if (word == "fixed") {
            std::string v;
            ls >> v;
            fixed.insert(v);
        } else if (word == "entry") {
            entries.push_back({lineno, t});
        } else {
            bad("unknown keyword '" + word + "'");
        }
    }
    if (block) fail("ParseError", "unterminated module block");
    if (!header || !tree) fail("ParseError", "missing 'multimap' header or tree");
    auto module = [&](const std::string& n) {
        auto it = mods.find(n);
        if (it == mods.end()) fail("ParseError", "unknown module '" + n + "'");
        return it->second;
    };
    std::vector<ModulePtr> ins;
    for (const auto& n : input_names) ins.push_back(module(n));
    SingularMultiMap f = make_map(*tree, ins, module(output_name), inv);
    f.params = params;
    f.fixed = fixed;
    const auto sv = f.series_vars();
    for (const auto& [ln, t] : entries) {
        lineno = ln;
        auto parts = text::split(t, '|');
        if (parts.size() != 3) bad("expected 'entry BASIS... | window | terms'");
        std::istringstream ts(parts[0]);
        std::string w;
        ts >> w;
        std::vector<int> tuple;
        for (int i = 0; ts >> w; ++i) {
            if (i >= f.arity()) bad("too many basis names");
            int k = f.inputs[i]->index_of(w);
            if (k < 0) bad("unknown basis vector '" + w + "'");
            tuple.push_back(k);
        }
        if (int(tuple.size()) != f.arity()) bad("too few basis names");
        try {
            f.set_entry(tuple, parse_series(text::trim(parts[1]) + "\n" + text::trim(parts[2]), f.output, sv));
        } catch (const Error& e) {
            if (e.kind() == "ParseError") throw;
            bad(e.what());
        }
    }
    return f;
}

}  // namespace vertexkit
