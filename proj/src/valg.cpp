#include "vertexkit/valg.hpp"

#include "vertexkit/errors.hpp"
#include "vertexkit/text.hpp"

#include <algorithm>
#include <climits>
#include <functional>
#include <sstream>

namespace vertexkit {

VertexAlgebra::VertexAlgebra(ModulePtr space, int vacuum, std::optional<int> weight_cutoff)
    : space_(std::move(space)), vacuum_(vacuum), cutoff_(weight_cutoff) {
    if (vacuum_ < 0 || vacuum_ >= space_->dim()) fail("InvalidVertexAlgebra", "vacuum index out of range");
    if (!space_->apply_T(vacuum_vec()).empty()) fail("InvalidVertexAlgebra", "T does not annihilate the vacuum");
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j) {
            LocalizedSeries s(space_, {"x"});
            if (auto c = ceiling_for(space_->weight(i) + space_->weight(j))) s.set_ceiling(*c);
            table_.emplace(std::make_pair(i, j), std::move(s));
        }
}

const LocalizedSeries* VertexAlgebra::entry(int i, int j) const {
    auto it = table_.find({i, j});
    return it == table_.end() ? nullptr : &it->second;
}

void VertexAlgebra::set_entry(int i, int j, LocalizedSeries s) {
    if (i < 0 || j < 0 || i >= dim() || j >= dim()) fail("IndexOutOfRange", "table entry outside the basis");
    if (s.vars() != std::vector<std::string>{"x"} || s.npairs())
        fail("InvalidVertexAlgebra", "table entries are series in x alone");
    if (s.module_ptr() != space_) s = s.with_module(space_);
    if (auto c = ceiling_for(space_->weight(i) + space_->weight(j))) {
        if (!s.ceiling() || *s.ceiling() > *c) s.set_ceiling(*c);
    }
    table_.insert_or_assign({i, j}, std::move(s));
}

void VertexAlgebra::set_unknown(int i, int j) { table_.erase({i, j}); }

LocalizedSeries& VertexAlgebra::mutable_entry(int i, int j) {
    auto it = table_.find({i, j});
    if (it == table_.end()) fail("IndexOutOfRange", "unknown table entry");
    return it->second;
}

std::optional<int> VertexAlgebra::ceiling_for(int weight, int lost) const {
    if (!cutoff_) return std::nullopt;
    return *cutoff_ - weight - lost;
}

bool VertexAlgebra::t_known(int i) const { return !cutoff_ || space_->weight(i) + 1 <= *cutoff_; }

int VertexAlgebra::weight_of(const Vec& v) const {
    int w = 0;
    for (const auto& [i, c] : v.entries()) w = std::max(w, space_->weight(i));
    return w;
}

bool VertexAlgebra::is_holomorphic() const {
    for (const auto& [ij, s] : table_)
        for (const auto& [k, c] : s.terms())
            if (k[0] < 0) return false;
    return true;
}

std::optional<LocalizedSeries> apply_Y(const VertexAlgebra& V, const Vec& a, const std::string& var,
                                       const LocalizedSeries& s) {
    if (s.var_index(var) >= 0) fail("InvalidArgument", "variable " + var + " already present");
    std::vector<std::string> vars{var};
    vars.insert(vars.end(), s.vars().begin(), s.vars().end());
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int p = 0; p < s.npairs(); ++p) pairs.push_back(s.pair_names(p));
    LocalizedSeries out(V.space_ptr(), vars, pairs);

    std::vector<int> svars(s.nvars());
    for (int i = 0; i < s.nvars(); ++i) svars[i] = i;
    long total = LONG_MAX;
    for (const auto& [k, v] : s.terms()) {
        long deg = s.degree_in(k, svars);
        for (const auto& [b, cb] : v.entries())
            for (const auto& [ia, ca] : a.entries()) {
                const LocalizedSeries* e = V.entry(ia, b);
                if (!e) return std::nullopt;
                if (auto c = e->ceiling()) total = std::min(total, *c + deg);
                for (const auto& [ke, ve] : e->terms()) {
                    Key kk{ke[0]};
                    kk.insert(kk.end(), k.begin(), k.end());
                    out.add_term(kk, (ca * cb) * ve);
                }
            }
    }
    std::vector<LocalizedSeries::Group> groups;
    for (const auto& g : s.groups()) {
        std::vector<int> gv;
        for (int v : g.vars) gv.push_back(v + 1);
        groups.push_back({gv, g.ceiling});
    }
    if (total != LONG_MAX) {
        std::vector<int> all(vars.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = int(i);
        groups.push_back({all, int(total)});
    }
    out.set_groups(groups);
    return out;
}

std::optional<LocalizedSeries> Y(const VertexAlgebra& V, const Vec& a, const Vec& b, const std::string& var) {
    return apply_Y(V, a, var, series_constant(V.space_ptr(), b));
}

LocalizedSeries apply_exp_T(const LocalizedSeries& s, const std::string& var) {
    LocalizedSeries base = s;
    if (s.var_index(var) < 0) {
        std::vector<std::string> vars = s.vars();
        vars.push_back(var);
        std::vector<std::pair<std::string, std::string>> pairs;
        for (int p = 0; p < s.npairs(); ++p) pairs.push_back(s.pair_names(p));
        base = s.embed(vars, pairs);
        // the total bound now covers the new variable too
        std::vector<LocalizedSeries::Group> groups;
        for (auto g : base.groups()) {
            if (int(g.vars.size()) == s.nvars()) g.vars.push_back(base.var_index(var));
            groups.push_back(g);
        }
        base.set_groups(groups);
    }
    const int vi = base.var_index(var);
    LocalizedSeries out(base.module_ptr(), base.vars(), [&] {
        std::vector<std::pair<std::string, std::string>> pairs;
        for (int p = 0; p < base.npairs(); ++p) pairs.push_back(base.pair_names(p));
        return pairs;
    }());
    out.set_window(base.window());
    const GModule& m = base.module();
    for (const auto& [k, v] : base.terms()) {
        Vec cur = v;
        Key kk = k;
        for (int j = 0; !cur.empty() && j <= m.dim(); ++j) {
            out.add_term(kk, cur);
            cur = Q(1, j + 1) * m.apply_T(cur);
            ++kk[vi];
        }
    }
    return out;
}

LocalizedSeries trim(LocalizedSeries s, std::optional<int> c) {
    if (c && (!s.ceiling() || *s.ceiling() > *c)) s.set_ceiling(*c);
    return s;
}

namespace {

using Part = std::vector<int>;  // creation modes, descending

std::string part_name(const Part& p) {
    if (p.empty()) return "vac";
    std::string s;
    for (int n : p) s += "a" + std::to_string(n);
    return s;
}

int part_weight(const Part& p) {
    int w = 0;
    for (int n : p) w += n;
    return w;
}

void partitions(int left, int max_part, Part& cur, std::vector<Part>& out) {
    out.push_back(cur);
    for (int n = std::min(left, max_part); n >= 1; --n) {
        cur.push_back(n);
        partitions(left - n, n, cur, out);
        cur.pop_back();
    }
}

using State = std::map<Part, Q>;

// a_n on a Fock state: creation for n < 0, [a_m, a_{-m}] = m for n > 0.
State mode(int n, const State& s) {
    State out;
    for (const auto& [p, c] : s) {
        if (n < 0) {
            Part q = p;
            q.insert(std::upper_bound(q.begin(), q.end(), -n, std::greater<int>()), -n);
            out[q] += c;
        } else if (n > 0) {
            long count = std::count(p.begin(), p.end(), n);
            if (!count) continue;
            Part q = p;
            q.erase(std::find(q.begin(), q.end(), n));
            out[q] += c * Q(n * count);
        }
    }
    std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
    return out;
}

}  // namespace

VertexAlgebra free_boson(int W) {
    if (W < 0) fail("InvalidArgument", "negative weight cutoff");
    std::vector<Part> parts;
    Part cur;
    partitions(W, W, cur, parts);
    std::sort(parts.begin(), parts.end(), [](const Part& a, const Part& b) {
        int wa = part_weight(a), wb = part_weight(b);
        if (wa != wb) return wa < wb;
        return a > b;
    });
    std::map<Part, int> index;
    std::vector<std::string> names;
    std::vector<int> weights;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        index[parts[i]] = int(i);
        names.push_back(part_name(parts[i]));
        weights.push_back(part_weight(parts[i]));
    }
    auto to_vec = [&](const State& s) {
        Vec v;
        for (const auto& [p, c] : s) {
            auto it = index.find(p);
            if (it != index.end()) v.add(it->second, c);
        }
        return v;
    };
    // [T, a_{-m}] = m a_{-m-1}
    std::vector<Vec> tcols;
    for (const auto& p : parts) {
        State s;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (i > 0 && p[i] == p[i - 1]) continue;
            long count = std::count(p.begin(), p.end(), p[i]);
            Part q = p;
            q.erase(std::find(q.begin(), q.end(), p[i]));
            q.insert(std::upper_bound(q.begin(), q.end(), p[i] + 1, std::greater<int>()), p[i] + 1);
            s[q] += Q(p[i] * count);
        }
        tcols.push_back(part_weight(p) + 1 <= W ? to_vec(s) : Vec{});
    }
    auto space = std::make_shared<GModule>("fock", names, weights, tcols, W);
    VertexAlgebra V(space, index.at(Part{}), W);
    V.name = "free_boson_w" + std::to_string(W);

    // Y(a_{-p1}...a_{-pk}|0>, x) = :d^(p1-1)a(x) ... d^(pk-1)a(x):, where
    // d^(p-1)a(x) = sum_n C(-n-1, p-1) a_n x^(-n-p).
    for (std::size_t iv = 0; iv < parts.size(); ++iv)
        for (std::size_t iw = 0; iw < parts.size(); ++iw) {
            const Part& v = parts[iv];
            const Part& w = parts[iw];
            const int wv = part_weight(v), ww = part_weight(w);
            LocalizedSeries e(space, {"x"});
            e.set_ceiling(W - wv - ww);
            e.set_floor("x", -(wv + ww));
            std::vector<int> modes(v.size());
            std::function<void(std::size_t, int, int, Q)> rec = [&](std::size_t i, int ann, int cre, Q coef) {
                if (i == v.size()) {
                    if (ww - ann + cre > W) return;
                    State s{{w, Q(1)}};
                    for (int n : modes)
                        if (n > 0) s = mode(n, s);
                    for (int n : modes)
                        if (n < 0) s = mode(n, s);
                    if (s.empty()) return;
                    int e_x = 0;
                    for (std::size_t t = 0; t < v.size(); ++t) e_x -= modes[t] + v[t];
                    e.add_term(Key{e_x}, coef * to_vec(s));
                    return;
                }
                for (int n = -(W - cre); n <= ww - ann; ++n) {
                    if (n == 0) continue;
                    Q c = binom(-n - 1, v[i] - 1);
                    if (c == 0) continue;
                    modes[i] = n;
                    rec(i + 1, ann + std::max(n, 0), cre + std::max(-n, 0), coef * c);
                }
            };
            rec(0, 0, 0, Q(1));
            V.set_entry(int(iv), int(iw), std::move(e));
        }
    return V;
}

std::optional<Vec> CommDiffAlgebra::mul(const Vec& a, const Vec& b) const {
    Vec r;
    for (const auto& [i, ca] : a.entries())
        for (const auto& [j, cb] : b.entries()) {
            auto it = product.find({i, j});
            if (it == product.end()) return std::nullopt;
            r.axpy(ca * cb, it->second);
        }
    return r;
}

CommDiffAlgebra polynomial_algebra(int W) {
    CommDiffAlgebra A;
    // d/dt keeps Q[t]/(t^(W+1)) closed, so T is exact at every weight
    ModulePtr m = polynomial_module(W);
    std::vector<Vec> cols;
    for (int i = 0; i < m->dim(); ++i) cols.push_back(m->t_column(i));
    std::vector<int> weights;
    for (int i = 0; i < m->dim(); ++i) weights.push_back(m->weight(i));
    A.module = std::make_shared<GModule>(m->name(), m->basis(), weights, cols);
    A.unit = 0;
    for (int i = 0; i <= W; ++i)
        for (int j = 0; i + j <= W; ++j) A.product[{i, j}] = Vec::unit(i + j);
    return A;
}

Report check_comm_alg(const CommDiffAlgebra& A) {
    Report r;
    const GModule& m = *A.module;
    const int n = m.dim();
    const std::string& u = m.basis_name(A.unit);
    r.record("unit annihilated by T", m.apply_T(Vec::unit(A.unit)).empty(), u);
    for (int i = 0; i < n; ++i) {
        Vec ei = Vec::unit(i);
        auto left = A.mul(Vec::unit(A.unit), ei);
        if (left) r.record("unit", *left == ei, m.basis_name(i));
        else r.skip("unit");
        for (int j = 0; j < n; ++j) {
            Vec ej = Vec::unit(j);
            std::string at = m.basis_name(i) + "," + m.basis_name(j);
            auto ab = A.mul(ei, ej), ba = A.mul(ej, ei);
            if (ab && ba) r.record("commutativity", *ab == *ba, at);
            else r.skip("commutativity");
            auto tab = ab ? std::optional<Vec>(m.apply_T(*ab)) : std::nullopt;
            auto l = A.mul(m.apply_T(ei), ej), rr = A.mul(ei, m.apply_T(ej));
            if (tab && l && rr) r.record("derivation", *tab == *l + *rr, at);
            else r.skip("derivation");
            for (int k = 0; k < n; ++k) {
                Vec ek = Vec::unit(k);
                std::optional<Vec> x, y;
                if (ab) x = A.mul(*ab, ek);
                if (auto bc = A.mul(ej, ek)) y = A.mul(ei, *bc);
                if (x && y) r.record("associativity", *x == *y, at + "," + m.basis_name(k));
                else r.skip("associativity");
            }
        }
    }
    return r;
}

bool operator==(const CommDiffAlgebra& a, const CommDiffAlgebra& b) {
    if (a.unit != b.unit || a.product != b.product) return false;
    if (a.module->basis() != b.module->basis()) return false;
    for (int i = 0; i < a.module->dim(); ++i)
        if (!(a.module->t_column(i) == b.module->t_column(i))) return false;
    return true;
}

VertexAlgebra from_comm_alg(const CommDiffAlgebra& A) {
    VertexAlgebra V(A.module, A.unit, std::nullopt);
    V.name = "holomorphic_" + A.module->name();
    const int n = A.module->dim();
    for (int i = 0; i < n; ++i) {
        // e^{xT} e_i must terminate
        std::vector<Vec> powers;
        Vec cur = Vec::unit(i);
        for (int k = 0; !cur.empty(); ++k) {
            if (k > n) fail("CutoffOverflow", "T is not nilpotent on " + A.module->basis_name(i));
            powers.push_back(cur);
            cur = Q(1, k + 1) * A.module->apply_T(cur);
        }
        for (int j = 0; j < n; ++j) {
            LocalizedSeries e(A.module, {"x"});
            bool known = true;
            for (std::size_t k = 0; k < powers.size() && known; ++k) {
                auto p = A.mul(powers[k], Vec::unit(j));
                if (!p) known = false;
                else e.add_term(Key{int(k)}, *p);
            }
            if (known) V.set_entry(i, j, std::move(e));
            else V.set_unknown(i, j);
        }
    }
    return V;
}

CommDiffAlgebra to_comm_alg(const VertexAlgebra& V) {
    if (!V.is_holomorphic()) fail("NotHolomorphic", V.name + " has singular vertex operators");
    CommDiffAlgebra A;
    A.module = V.space_ptr();
    A.unit = V.vacuum();
    for (int i = 0; i < V.dim(); ++i)
        for (int j = 0; j < V.dim(); ++j) {
            const LocalizedSeries* e = V.entry(i, j);
            if (!e || (e->ceiling() && *e->ceiling() < 0)) continue;
            A.product[{i, j}] = e->coeff(Key{0});
        }
    return A;
}

namespace {

std::string where(const VertexAlgebra& V, std::initializer_list<int> idx, const std::string& detail = {}) {
    std::string s;
    for (int i : idx) s += (s.empty() ? "" : ",") + V.space().basis_name(i);
    if (!detail.empty()) s += ": " + detail;
    return s;
}

void compare(Report& r, const std::string& name, const VertexAlgebra& V, std::initializer_list<int> idx,
             const std::optional<LocalizedSeries>& a, const std::optional<LocalizedSeries>& b) {
    if (!a || !b) {
        r.skip(name);
        return;
    }
    bool ok = equal_within(*a, *b);
    r.record(name, ok, ok ? std::string{} : where(V, idx, difference_witness(*a, *b)));
}

std::optional<LocalizedSeries> known(const LocalizedSeries* p) {
    return p ? std::optional<LocalizedSeries>(*p) : std::nullopt;
}

}  // namespace

Report check_axioms(const VertexAlgebra& V) {
    Report r;
    const GModule& m = V.space();
    const int n = V.dim(), vac = V.vacuum();
    r.record("vacuum annihilated by T", m.apply_T(V.vacuum_vec()).empty(), m.basis_name(vac));
    for (int a = 0; a < n; ++a) {
        Vec ea = Vec::unit(a);
        const int wa = m.weight(a);
        compare(r, "vacuum identity", V, {a}, known(V.entry(vac, a)), series_constant(V.space_ptr(), ea, {"x"}));
        if (const LocalizedSeries* e = V.entry(a, vac)) {
            bool ok = true;
            std::string detail;
            try {
                LocalizedSeries at0 = restrict_zero(*e, "x");
                ok = equal_within(at0, series_constant(V.space_ptr(), ea));
                if (!ok) detail = difference_witness(at0, series_constant(V.space_ptr(), ea));
            } catch (const Error& err) {
                ok = false;
                detail = err.what();
            }
            r.record("vacuum creation at zero", ok, ok ? std::string{} : where(V, {a}, detail));
        } else {
            r.skip("vacuum creation at zero");
        }
        compare(r, "creation", V, {a}, known(V.entry(a, vac)), exp_T(V.space_ptr(), ea, "x", V.ceiling_for(wa)));
        Vec ta = m.apply_T(ea);
        for (int b = 0; b < n; ++b) {
            const LocalizedSeries* e = V.entry(a, b);
            Vec eb = Vec::unit(b), tb = m.apply_T(eb);
            auto c1 = V.ceiling_for(wa + m.weight(b), 1);
            std::optional<LocalizedSeries> yatb = Y(V, ea, tb), ytab = Y(V, ta, eb);
            // T on a top-weight vector was cut off, so it is not data
            if (!V.t_known(b)) yatb.reset();
            if (!V.t_known(a)) ytab.reset();
            if (!e) {
                r.skip("translation covariance");
                r.skip("derivative");
                r.skip("translation on both slots");
                continue;
            }
            LocalizedSeries te = trim(series_apply_T(*e), c1);
            std::optional<LocalizedSeries> lhs;
            if (yatb) lhs = te - *yatb;
            compare(r, "translation covariance", V, {a, b}, lhs, series_derive(*e, "x"));
            compare(r, "derivative", V, {a, b}, series_derive(*e, "x"), ytab);
            std::optional<LocalizedSeries> both;
            if (yatb && ytab) both = *yatb + *ytab;
            compare(r, "translation on both slots", V, {a, b}, both, te);
        }
    }
    return r;
}

Report check_quasisymmetry(const VertexAlgebra& V) {
    Report r;
    for (int a = 0; a < V.dim(); ++a)
        for (int b = 0; b < V.dim(); ++b) {
            const LocalizedSeries* ab = V.entry(a, b);
            const LocalizedSeries* ba = V.entry(b, a);
            std::optional<LocalizedSeries> rhs;
            if (ba) rhs = apply_exp_T(scale_var(*ba, "x", Q(-1)), "x");
            compare(r, "quasisymmetry", V, {a, b}, known(ab), rhs);
        }
    return r;
}

std::optional<std::pair<LocalizedSeries, LocalizedSeries>> operator_products(const VertexAlgebra& V, int a, int b,
                                                                            int c) {
    Vec ea = Vec::unit(a), eb = Vec::unit(b), ec = Vec::unit(c);
    auto inner1 = Y(V, eb, ec, "y");
    auto inner2 = Y(V, ea, ec, "x");
    if (!inner1 || !inner2) return std::nullopt;
    auto p1 = apply_Y(V, ea, "x", *inner1);
    auto p2 = apply_Y(V, eb, "y", *inner2);
    if (!p1 || !p2) return std::nullopt;
    return std::make_pair(*p1, p2->embed({"x", "y"}, {}));
}

int check_locality(const VertexAlgebra& V, int a, int b, int n_max) {
    int order = 0;
    for (int c = 0; c < V.dim(); ++c) {
        auto prods = operator_products(V, a, b, c);
        if (!prods) continue;
        LocalizedSeries d = prods->first - prods->second;
        int found = -1;
        for (int N = order; N <= n_max && found < 0; ++N)
            if (is_zero_within(series_mul(localize(N, "x", "y"), d))) found = N;
        if (found < 0)
            fail("NotLocalWithin", "(" + V.space().basis_name(a) + ", " + V.space().basis_name(b) +
                                       ") needs more than N=" + std::to_string(n_max));
        order = found;
    }
    return order;
}

std::optional<int> locality_order(const VertexAlgebra& V, int n_max) {
    int order = 0;
    try {
        for (int a = 0; a < V.dim(); ++a)
            for (int b = 0; b < V.dim(); ++b) order = std::max(order, check_locality(V, a, b, n_max));
    } catch (const Error& e) {
        if (e.kind() == "NotLocalWithin") return std::nullopt;
        throw;
    }
    return order;
}

bool same_table(const VertexAlgebra& a, const VertexAlgebra& b) {
    if (a.dim() != b.dim() || a.vacuum() != b.vacuum()) return false;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) {
            const LocalizedSeries* x = a.entry(i, j);
            const LocalizedSeries* y = b.entry(i, j);
            if (!x || !y) {
                if (x || y) return false;
                continue;
            }
            if (!equal_within(*x, *y)) return false;
        }
    return true;
}

std::string format_vertex_algebra(const VertexAlgebra& V) {
    const GModule& m = V.space();
    std::ostringstream os;
    os << "vertex-algebra " << V.name << "\n";
    os << "cutoff " << (V.weight_cutoff() ? std::to_string(*V.weight_cutoff()) : std::string("none")) << "\n";
    for (int i = 0; i < m.dim(); ++i) os << "basis " << m.basis_name(i) << " " << m.weight(i) << "\n";
    os << "vacuum " << m.basis_name(V.vacuum()) << "\n";
    for (int i = 0; i < m.dim(); ++i)
        if (!m.t_column(i).empty()) os << "T " << m.basis_name(i) << " -> " << format_vec(m, m.t_column(i)) << "\n";
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) {
            const LocalizedSeries* e = V.entry(i, j);
            if (!e) {
                os << "unknown " << m.basis_name(i) << " " << m.basis_name(j) << "\n";
                continue;
            }
            for (const auto& [k, c] : e->terms())
                os << "Y " << m.basis_name(i) << " " << m.basis_name(j) << " " << k[0] << " -> " << format_vec(m, c)
                   << "\n";
        }
    return os.str();
}

VertexAlgebra parse_vertex_algebra(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    std::string name = "V";
    std::optional<int> cutoff;
    std::vector<std::string> basis;
    std::vector<int> weights;
    std::string vacuum;
    std::vector<std::pair<std::string, std::string>> tlines;
    std::vector<std::tuple<std::string, std::string, int, std::string, int>> ylines;
    std::vector<std::pair<std::string, std::string>> unknown;
    auto bad = [&](const std::string& what) { fail("ParseError", "line " + std::to_string(lineno) + ": " + what); };
    while (std::getline(is, line)) {
        ++lineno;
        auto t = text::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ls(t);
        std::string word;
        ls >> word;
        if (word == "vertex-algebra") {
            ls >> name;
        } else if (word == "cutoff") {
            std::string c;
            ls >> c;
            long v;
            if (c == "none") cutoff.reset();
            else if (text::parse_int(c, v)) cutoff = int(v);
            else bad("bad cutoff '" + c + "'");
        } else if (word == "basis") {
            std::string b;
            int w;
            if (!(ls >> b >> w)) bad("expected 'basis NAME WEIGHT'");
            basis.push_back(b);
            weights.push_back(w);
        } else if (word == "vacuum") {
            ls >> vacuum;
        } else if (word == "T" || word == "Y") {
            auto arrow = t.find("->");
            if (arrow == std::string::npos) bad("missing '->'");
            std::istringstream head(t.substr(0, arrow));
            std::string w0, a, b;
            head >> w0 >> a;
            std::string rhs = text::trim(t.substr(arrow + 2));
            if (word == "T") {
                tlines.push_back({a, rhs});
            } else {
                long n;
                std::string ns;
                if (!(head >> b >> ns) || !text::parse_int(ns, n)) bad("expected 'Y A B N -> vector'");
                ylines.emplace_back(a, b, int(n), rhs, lineno);
            }
        } else if (word == "unknown") {
            std::string a, b;
            if (!(ls >> a >> b)) bad("expected 'unknown A B'");
            unknown.push_back({a, b});
        } else {
            bad("unknown keyword '" + word + "'");
        }
    }
    if (basis.empty()) fail("ParseError", "no basis lines");
    std::vector<Vec> tcols(basis.size());
    auto idx = [&](const std::string& b) {
        auto it = std::find(basis.begin(), basis.end(), b);
        if (it == basis.end()) fail("ParseError", "unknown basis vector '" + b + "'");
        return int(it - basis.begin());
    };
    auto proto = std::make_shared<GModule>(name, basis, weights, std::vector<Vec>(basis.size()));
    for (const auto& [a, rhs] : tlines) tcols[idx(a)] = parse_vec(*proto, rhs);
    auto space = std::make_shared<GModule>(name, basis, weights, tcols, cutoff);
    VertexAlgebra V(space, idx(vacuum.empty() ? basis[0] : vacuum), cutoff);
    V.name = name;
    std::map<std::pair<int, int>, LocalizedSeries> entries;
    for (const auto& [a, b, n, rhs, ln] : ylines) {
        auto key = std::make_pair(idx(a), idx(b));
        auto it = entries.find(key);
        if (it == entries.end()) it = entries.emplace(key, LocalizedSeries(space, {"x"})).first;
        it->second.add_term(Key{n}, parse_vec(*space, rhs));
    }
    for (int i = 0; i < V.dim(); ++i)
        for (int j = 0; j < V.dim(); ++j) {
            auto it = entries.find({i, j});
            LocalizedSeries e = it == entries.end() ? LocalizedSeries(space, {"x"}) : it->second;
            if (cutoff) e.set_floor("x", std::min(0, -(weights[i] + weights[j])));
            V.set_entry(i, j, e);
        }
    for (const auto& [a, b] : unknown) V.set_unknown(idx(a), idx(b));
    return V;
}

}  // namespace vertexkit
