#include "vertexkit/errors.hpp"
#include "vertexkit/series.hpp"

#include <algorithm>

namespace vertexkit {

namespace {

constexpr long kInf = 1L << 40;
constexpr long kNegInf = -(1L << 40);

long sat_add(long a, long b) {
    if (a <= kNegInf || b <= kNegInf) return kNegInf;
    if (a >= kInf || b >= kInf) return kInf;
    return a + b;
}

int clamp_ceiling(long c) { return int(std::max(c, -(1L << 24))); }

std::vector<bool> support_of(const LocalizedSeries& s) {
    std::vector<bool> sup(s.nvars(), false);
    for (const auto& [k, c] : s.terms()) {
        for (int i = 0; i < s.nvars(); ++i)
            if (k[i]) sup[i] = true;
        for (int p = 0; p < s.npairs(); ++p)
            if (k[s.nvars() + p]) sup[s.pairs()[p].first] = sup[s.pairs()[p].second] = true;
    }
    for (const auto& g : s.groups())
        for (int v : g.vars) sup[v] = true;
    return sup;
}

bool in_sorted(const std::vector<int>& v, int x) { return std::binary_search(v.begin(), v.end(), x); }

// Lower bound of the degree in `g` over every term of s, known or not.
long degree_floor(const LocalizedSeries& s, const std::vector<bool>& sup, const std::vector<int>& g) {
    std::vector<int> gs;
    for (int v : g)
        if (sup[v]) gs.push_back(v);
    long stored = kInf;
    for (const auto& [k, c] : s.terms()) stored = std::min<long>(stored, s.degree_in(k, g));
    if (gs.empty()) return s.is_exact() ? stored : std::min(stored, 0L);
    if (s.is_exact()) return stored;
    long unknown = kNegInf;
    if (s.groups().size() == 1) {
        std::vector<int> hs;
        for (int v : s.groups()[0].vars)
            if (sup[v]) hs.push_back(v);
        if (hs == gs) unknown = long(s.groups()[0].ceiling) + 1;
    }
    if (unknown == kNegInf) {
        long f = 0;
        bool ok = true;
        for (int v : gs) {
            if (!s.floor_vec()[v]) ok = false;
            else f += *s.floor_vec()[v];
        }
        for (int p = 0; p < s.npairs() && ok; ++p) {
            auto [i, j] = s.pairs()[p];
            if (in_sorted(gs, i) && in_sorted(gs, j)) {
                if (!s.diff_floor_vec()[p]) ok = false;
                else f += *s.diff_floor_vec()[p];
            }
        }
        if (ok) unknown = f;
    }
    return std::min(stored, unknown);
}

std::pair<LocalizedSeries, LocalizedSeries> common_frame(const LocalizedSeries& a, const LocalizedSeries& b) {
    if (a.vars() == b.vars() && a.pairs() == b.pairs()) return {a, b};
    std::vector<std::string> vars = a.vars();
    for (const auto& v : b.vars())
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int p = 0; p < a.npairs(); ++p) pairs.push_back(a.pair_names(p));
    for (int p = 0; p < b.npairs(); ++p) pairs.push_back(b.pair_names(p));
    return {a.embed(vars, pairs), b.embed(vars, pairs)};
}

std::vector<std::pair<std::string, std::string>> pair_list(const LocalizedSeries& s) {
    std::vector<std::pair<std::string, std::string>> out;
    for (int p = 0; p < s.npairs(); ++p) out.push_back(s.pair_names(p));
    return out;
}

Key key_add(const Key& a, const Key& b) {
    Key r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

}  // namespace

LocalizedSeries series_mul(const LocalizedSeries& a0, const LocalizedSeries& b0) {
    if (!a0.module().is_scalar() && !b0.module().is_scalar())
        fail("NonAlgebraCoefficients", "both factors carry module coefficients");
    auto [a, b] = common_frame(a0, b0);
    ModulePtr m = a.module().is_scalar() ? b.module_ptr() : a.module_ptr();
    LocalizedSeries out(m, a.vars(), pair_list(a));
    auto sa = support_of(a), sb = support_of(b);

    std::vector<LocalizedSeries::Group> groups;
    for (const auto& g : a.groups()) {
        long c = sat_add(g.ceiling, degree_floor(b, sb, g.vars));
        if (c < kInf) groups.push_back({g.vars, clamp_ceiling(c)});
    }
    for (const auto& g : b.groups()) {
        long c = sat_add(g.ceiling, degree_floor(a, sa, g.vars));
        if (c < kInf) groups.push_back({g.vars, clamp_ceiling(c)});
    }
    out.set_groups(groups);
    for (int i = 0; i < a.nvars(); ++i) {
        auto fa = a.floor_vec()[i], fb = b.floor_vec()[i];
        if (!fa && !fb) continue;
        if (!fa && !sa[i]) fa = 0;
        if (!fb && !sb[i]) fb = 0;
        if (fa && fb && *fa + *fb < 0) out.set_floor(a.vars()[i], *fa + *fb);
    }
    for (int p = 0; p < a.npairs(); ++p) {
        auto fa = a.diff_floor_vec()[p], fb = b.diff_floor_vec()[p];
        if (fa && fb) out.set_diff_floor(a.pair_names(p).first, a.pair_names(p).second, *fa + *fb);
    }
    // Products may leave the floors before reduction; floors are applied after.
    LocalizedSeries raw(m, a.vars(), pair_list(a));
    raw.set_groups(out.groups());
    for (const auto& [ka, ca] : a.terms())
        for (const auto& [kb, cb] : b.terms()) {
            Key k = key_add(ka, kb);
            if (a.module().is_scalar()) raw.add_term(std::move(k), ca.get(0) * cb);
            else raw.add_term(std::move(k), cb.get(0) * ca);
        }
    raw.reduce();
    Window w = out.window();
    for (auto it = w.floors.begin(); it != w.floors.end();) {
        int i = raw.var_index(it->first);
        bool ok = true;
        for (const auto& [k, c] : raw.terms())
            if (k[i] < it->second) ok = false;
        it = ok ? std::next(it) : w.floors.erase(it);
    }
    for (auto it = w.diff_floors.begin(); it != w.diff_floors.end();) {
        int p = raw.pair_index(it->first.first, it->first.second);
        bool ok = true;
        for (const auto& [k, c] : raw.terms())
            if (k[raw.nvars() + p] < it->second) ok = false;
        it = ok ? std::next(it) : w.diff_floors.erase(it);
    }
    raw.set_window(w);
    return raw;
}

LocalizedSeries series_derive(const LocalizedSeries& a, const std::string& v) {
    int i = a.var_index(v);
    if (i < 0) fail("UnknownVariable", v);
    const int n = a.nvars();
    LocalizedSeries out(a.module_ptr(), a.vars(), pair_list(a));
    auto groups = a.groups();
    for (auto& g : groups)
        if (in_sorted(g.vars, i)) g.ceiling -= 1;
    out.set_groups(groups);
    for (int j = 0; j < n; ++j)
        if (auto f = a.floor_vec()[j]) out.set_floor(a.vars()[j], (j == i && *f < 0) ? *f - 1 : *f);
    for (int p = 0; p < a.npairs(); ++p)
        if (auto f = a.diff_floor_vec()[p]) {
            bool touches = a.pairs()[p].first == i || a.pairs()[p].second == i;
            out.set_diff_floor(a.pair_names(p).first, a.pair_names(p).second, touches ? *f - 1 : *f);
        }
    for (const auto& [k, c] : a.terms()) {
        if (k[i] != 0) {
            Key kk = k;
            kk[i] -= 1;
            out.add_term(kk, Q(k[i]) * c);
        }
        for (int p = 0; p < a.npairs(); ++p) {
            int d = k[n + p];
            if (d == 0) continue;
            int sign;
            if (a.pairs()[p].first == i) sign = 1;
            else if (a.pairs()[p].second == i) sign = -1;
            else continue;
            Key kk = k;
            kk[n + p] -= 1;
            out.add_term(kk, Q(d * sign) * c);
        }
    }
    out.reduce();
    return out;
}

LocalizedSeries series_derive_divided(const LocalizedSeries& a, const std::string& v, int k) {
    LocalizedSeries r = a;
    for (int i = 1; i <= k; ++i) r = Q(1, i) * series_derive(r, v);
    return r;
}

LocalizedSeries series_map_coeffs(const LocalizedSeries& a, ModulePtr to, const std::vector<Vec>& columns) {
    if (int(columns.size()) != a.module().dim()) fail("ModuleMismatch", "linear map has wrong column count");
    LocalizedSeries out = LocalizedSeries(to, a.vars(), pair_list(a));
    out.set_window(a.window());
    for (const auto& [k, c] : a.terms()) {
        Vec img;
        for (const auto& [j, q] : c.entries()) img.axpy(q, columns[j]);
        out.add_term(k, img);
    }
    return out;
}

LocalizedSeries series_apply_T(const LocalizedSeries& a) {
    std::vector<Vec> cols;
    for (int j = 0; j < a.module().dim(); ++j) cols.push_back(a.module().t_column(j));
    return series_map_coeffs(a, a.module_ptr(), cols);
}

LocalizedSeries series_apply_divided_T(const LocalizedSeries& a, int k) {
    std::vector<Vec> cols;
    for (int j = 0; j < a.module().dim(); ++j) cols.push_back(a.module().apply_divided_T(Vec::unit(j), k));
    return series_map_coeffs(a, a.module_ptr(), cols);
}

LocalizedSeries series_coeff_component(const LocalizedSeries& a, int basis_index) {
    std::vector<Vec> cols(a.module().dim());
    cols.at(basis_index) = Vec::unit(0);
    return series_map_coeffs(a, GModule::scalars(), cols);
}

namespace {

// One step of T - sum of partials.
LocalizedSeries translation_step(const LocalizedSeries& a) {
    LocalizedSeries r = series_apply_T(a);
    for (const auto& v : a.vars()) r -= series_derive(a, v);
    return r;
}

}  // namespace

LocalizedSeries hopf_act(const HopfElement& h, const LocalizedSeries& a) {
    LocalizedSeries out(a.module_ptr(), a.vars(), pair_list(a));
    out.set_window(a.window());
    LocalizedSeries power = a;  // i-th divided power applied to a
    int top = h.degree();
    for (int i = 0; i <= top; ++i) {
        if (i > 0) power = Q(1, i) * translation_step(power);
        Q c = h.coeff(i);
        if (c != 0) out += c * power;
    }
    return out;
}

bool is_invariant(const LocalizedSeries& a) {
    int top = std::max(1, a.ceiling().value_or(1));
    LocalizedSeries power = a;
    for (int i = 1; i <= top; ++i) {
        power = Q(1, i) * translation_step(power);
        if (!is_zero_within(power)) return false;
        if (a.is_exact()) break;
    }
    return true;
}

LocalizedSeries reconstruct_invariant(const LocalizedSeries& a, const std::string& axis, ReconstructMode mode) {
    if (a.nvars() != 2) fail("InvalidArgument", "reconstruction needs exactly two variables");
    if (a.has_symbols()) fail("InvalidArgument", "reconstruction needs a series without difference symbols");
    int ix = a.var_index(axis);
    if (ix < 0) fail("UnknownVariable", axis);
    int iy = 1 - ix;
    if (!is_invariant(a)) fail("NotInvariant", "input series is not invariant");
    // Coefficient lookup b(i,j) with i the axis exponent.
    auto b = [&](int i, int j) {
        Key k = a.zero_key();
        k[ix] = i;
        k[iy] = j;
        return a.coeff(k);
    };
    int lo_x = 0, lo_y = 0, hi = 0;
    for (const auto& [k, c] : a.terms()) {
        lo_x = std::min(lo_x, k[ix]);
        lo_y = std::min(lo_y, k[iy]);
        hi = std::max(hi, k[ix] + k[iy]);
    }
    if (auto f = a.floor_vec()[ix]) lo_x = std::min(lo_x, *f);
    if (auto f = a.floor_vec()[iy]) lo_y = std::min(lo_y, *f);
    if (auto c = a.ceiling()) hi = *c;
    const GModule& m = a.module();
    LocalizedSeries out(a.module_ptr(), a.vars());
    out.set_window(a.window());
    if (mode == ReconstructMode::FromFirstSlice) {
        if (lo_y < 0) fail("InvalidArgument", "slice reconstruction needs non-negative exponents off the axis");
        for (int i = lo_x; i <= hi; ++i)
            for (int j = 0; i + j <= hi; ++j) {
                Vec acc;
                for (int p = 0; p <= j; ++p) {
                    Q c = binom(i + p, p);
                    if (p % 2) c = -c;
                    acc.axpy(c, m.apply_divided_T(b(i + p, 0), j - p));
                }
                Key k = out.zero_key();
                k[ix] = i;
                k[iy] = j;
                out.add_term(k, acc);
            }
    } else {
        if (lo_x < 0) fail("InvalidArgument", "slice reconstruction needs non-negative exponents off the axis");
        for (int j = lo_y; j <= hi; ++j)
            for (int i = 0; i + j <= hi; ++i) {
                Vec acc;
                for (int q = 0; q <= i; ++q) {
                    Q c = binom(j + q, q);
                    if (q % 2) c = -c;
                    acc.axpy(c, m.apply_divided_T(b(0, j + q), i - q));
                }
                Key k = out.zero_key();
                k[ix] = i;
                k[iy] = j;
                out.add_term(k, acc);
            }
    }
    return out;
}

LocalizedSeries localize(int k, const std::string& x1, const std::string& x2, ModulePtr m, const Vec& coeff) {
    if (x1 == x2) fail("UnknownPair", "(" + x1 + "," + x2 + ")");
    LocalizedSeries s(std::move(m), {x1, x2}, {{x1, x2}});
    s.add_term({}, {{{x1, x2}, k}}, coeff);
    return s;
}

// ---------------------------------------------------------------------------
// Expansion engine.  A term of the output is a product of factors; a factor is
// either a fixed polynomial or a binomial series
//     scale * sum_m C(d, m) * base * coord^(d-m) * shift^m,
// where coord is a variable or a declared pair and shift a polynomial.  The
// output window bounds every sum; infinite series need a bound whose degree
// strictly grows with m.

namespace {

using Poly = std::map<Key, Q>;

struct Factor {
    Poly fixed;
    bool moving = false;
    Key base;
    int coord = -1;  // key position (variable index, or nvars + pair index)
    int d = 0;
    Poly shift;
    Q scale = 1;
};

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ka, qa] : a)
        for (const auto& [kb, qb] : b) {
            Q& slot = r[key_add(ka, kb)];
            slot += qa * qb;
        }
    std::erase_if(r, [](const auto& kv) { return kv.second == 0; });
    return r;
}

class Expander {
public:
    Expander(LocalizedSeries& out, std::vector<Factor> fs) : out_(out), fs_(std::move(fs)) {
        const auto& groups = out_.groups();
        const int ng = int(groups.size());
        const int nf = int(fs_.size());
        min_.assign(nf, std::vector<long>(ng, 0));
        slope_.assign(nf, std::vector<long>(ng, 0));
        base_.assign(nf, std::vector<long>(ng, 0));
        rate_.assign(nf, std::vector<long>(ng, 0));
        for (int f = 0; f < nf; ++f) {
            const Factor& F = fs_[f];
            for (int g = 0; g < ng; ++g) {
                const auto& gv = groups[g].vars;
                if (!F.moving) {
                    long mn = kInf;
                    for (const auto& [k, q] : F.fixed) mn = std::min<long>(mn, out_.degree_in(k, gv));
                    min_[f][g] = F.fixed.empty() ? 0 : mn;
                    continue;
                }
                long base = out_.degree_in(F.base, gv);
                long rate;
                if (F.coord < out_.nvars()) {
                    rate = in_sorted(gv, F.coord) ? 1 : 0;
                } else {
                    auto [i, j] = out_.pairs()[F.coord - out_.nvars()];
                    rate = (in_sorted(gv, i) && in_sorted(gv, j)) ? 1 : 0;
                }
                long smin = kInf;
                for (const auto& [k, q] : F.shift) smin = std::min<long>(smin, out_.degree_in(k, gv));
                base_[f][g] = base + rate * F.d;
                rate_[f][g] = rate;
                if (F.shift.empty()) {
                    slope_[f][g] = 0;
                    min_[f][g] = base_[f][g];
                    continue;
                }
                slope_[f][g] = smin - rate;
                long l0 = base_[f][g];
                if (finite(F)) {
                    min_[f][g] = std::min(l0, l0 + slope_[f][g] * F.d);
                } else {
                    min_[f][g] = slope_[f][g] >= 0 ? l0 : kNegInf;
                }
            }
        }
        rem_.assign(nf + 1, std::vector<long>(ng, 0));
        for (int f = nf - 1; f >= 0; --f)
            for (int g = 0; g < ng; ++g) rem_[f][g] = sat_add(rem_[f + 1][g], min_[f][g]);
        for (int f = 0; f < nf; ++f) {
            if (!fs_[f].moving || finite(fs_[f])) continue;
            bool bounded = false;
            for (int g = 0; g < ng; ++g) {
                long rest = 0;
                for (int h = 0; h < nf; ++h)
                    if (h != f) rest = sat_add(rest, min_[h][g]);
                if (slope_[f][g] >= 1 && rest > kNegInf) bounded = true;
            }
            if (!bounded)
                fail("UnsupportedSubstitution",
                     "expansion is unbounded: no degree bound grows with the shift variables");
        }
    }

    void run(const Vec& c) {
        coeff_ = &c;
        dfs(0, out_.zero_key(), Q(1));
    }

private:
    static bool finite(const Factor& F) { return F.shift.empty() || F.d >= 0; }

    void dfs(int level, const Key& key, const Q& coef) {
        const auto& groups = out_.groups();
        std::vector<long> deg(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g) {
            deg[g] = out_.degree_in(key, groups[g].vars);
            if (sat_add(deg[g], rem_[level][g]) > groups[g].ceiling) return;
        }
        if (level == int(fs_.size())) {
            out_.add_term(key, coef * *coeff_);
            return;
        }
        const Factor& F = fs_[level];
        if (!F.moving) {
            for (const auto& [k, q] : F.fixed) dfs(level + 1, key_add(key, k), coef * q);
            return;
        }
        Poly spow{{out_.zero_key(), Q(1)}};
        for (int m = 0;; ++m) {
            if (finite(F) && m > (F.shift.empty() ? 0 : F.d)) break;
            bool stop = false;
            for (std::size_t g = 0; g < groups.size() && !stop; ++g) {
                if (slope_[level][g] < 0) continue;
                long lm = base_[level][g] + slope_[level][g] * m;
                if (sat_add(sat_add(deg[g], lm), rem_[level + 1][g]) > groups[g].ceiling) stop = true;
            }
            if (stop) break;
            Q cm = F.scale * binom(F.d, m);
            if (cm != 0) {
                Poly cpow = coord_power(F, F.d - m);
                for (const auto& [ks, qs] : spow)
                    for (const auto& [kc, qc] : cpow)
                        dfs(level + 1, key_add(key_add(key, F.base), key_add(ks, kc)), coef * cm * qs * qc);
            }
            spow = poly_mul(spow, F.shift);
        }
    }

    Poly coord_power(const Factor& F, int e) const {
        Key k = out_.zero_key();
        if (F.coord < out_.nvars() || e < 0) {
            k[F.coord] = e;
            return {{k, Q(1)}};
        }
        auto [i, j] = out_.pairs()[F.coord - out_.nvars()];
        Poly r;
        for (int t = 0; t <= e; ++t) {
            Key kk = k;
            kk[i] = e - t;
            kk[j] = t;
            Q c = binom(e, t);
            r[kk] = (t % 2) ? Q(-c) : c;
        }
        return r;
    }

    LocalizedSeries& out_;
    std::vector<Factor> fs_;
    std::vector<std::vector<long>> min_, slope_, base_, rate_, rem_;
    const Vec* coeff_ = nullptr;
};

}  // namespace

LocalizedSeries expand_diff(const LocalizedSeries& a, const std::string& x, const std::string& y,
                            const std::string& subordinate, std::optional<int> sub_cap) {
    if (subordinate != x && subordinate != y)
        fail("InvalidArgument", "subordinate must be one of the pair's variables");
    int p = a.pair_index(x, y);
    if (p < 0) {
        if (a.var_index(x) < 0) fail("UnknownVariable", x);
        if (a.var_index(y) < 0) fail("UnknownVariable", y);
        return a;
    }
    const int n = a.nvars();
    auto [vi, vj] = a.pairs()[p];
    int sub = a.var_index(subordinate);
    int lead = sub == vj ? vi : vj;

    std::vector<std::pair<std::string, std::string>> pairs;
    for (int q = 0; q < a.npairs(); ++q)
        if (q != p) pairs.push_back(a.pair_names(q));
    LocalizedSeries out(a.module_ptr(), a.vars(), pairs);
    auto groups = a.groups();
    bool bounded = false;
    for (const auto& g : groups)
        if (in_sorted(g.vars, sub) && !in_sorted(g.vars, lead)) bounded = true;
    if (sub_cap) {
        groups.push_back({{sub}, *sub_cap});
    } else if (!bounded) {
        auto c = a.ceiling();
        if (!c) fail("UnsupportedSubstitution", "no bound on the subordinate variable " + subordinate);
        groups.push_back({{sub}, *c});
    }
    out.set_groups(groups);
    for (int q = 0, r = 0; q < a.npairs(); ++q) {
        if (q == p) continue;
        if (auto f = a.diff_floor_vec()[q]) out.set_diff_floor(a.pair_names(q).first, a.pair_names(q).second, *f);
        ++r;
    }
    std::optional<int> lead_floor = a.floor_vec()[lead];
    for (int i = 0; i < n; ++i)
        if (i != lead)
            if (auto f = a.floor_vec()[i]) out.set_floor(a.vars()[i], *f);
    // Map an input key to the output layout.
    auto strip = [&](const Key& k) {
        Key kk(k.begin(), k.begin() + n);
        for (int q = 0; q < a.npairs(); ++q)
            if (q != p) kk.push_back(k[n + q]);
        return kk;
    };
    for (const auto& [k, c] : a.terms()) {
        int d = k[n + p];
        if (d == 0) {
            out.add_term(strip(k), c);
            continue;
        }
        if (lead_floor && k[lead] + d < *lead_floor)
            fail("FloorTooShallow", "floor " + std::to_string(*lead_floor) + " on " + a.vars()[lead] +
                                        " cannot hold exponent " + std::to_string(k[lead] + d));
        Factor F;
        F.moving = true;
        F.base = strip(k);
        F.coord = lead;
        F.d = d;
        Key s = out.zero_key();
        s[sub] = 1;
        F.shift = {{s, Q(-1)}};
        F.scale = (sub == vi && (d % 2)) ? Q(-1) : Q(1);
        Expander ex(out, {F});
        ex.run(c);
    }
    if (lead_floor) {
        int cut = INT_MAX;
        for (const auto& [k, c] : out.terms())
            if (k[lead] < *lead_floor) cut = std::min(cut, k[sub]);
        if (cut != INT_MAX) out.add_group({sub}, cut - 1);
        out.set_floor(a.vars()[lead], *lead_floor);
    }
    return out;
}

LocalizedSeries shift_vars(const LocalizedSeries& a, const ShiftSpec& spec) {
    const int n = a.nvars();
    // Images of every input variable.
    std::vector<std::vector<SignedVar>> img(n);
    for (int i = 0; i < n; ++i) {
        auto it = spec.images.find(a.vars()[i]);
        if (it == spec.images.end()) img[i] = {{a.vars()[i], 1}};
        else img[i] = it->second;
        if (img[i].empty()) fail("UnsupportedSubstitution", "empty image for " + a.vars()[i]);
        for (const auto& sv : img[i])
            if (sv.sign != 1 && sv.sign != -1) fail("UnsupportedSubstitution", "image signs must be +1 or -1");
    }
    for (const auto& [v, im] : spec.images)
        if (a.var_index(v) < 0) fail("UnknownVariable", v);
    std::vector<std::string> out_vars = spec.out_vars;
    if (out_vars.empty()) {
        auto add = [&](const std::string& v) {
            if (std::find(out_vars.begin(), out_vars.end(), v) == out_vars.end()) out_vars.push_back(v);
        };
        for (int i = 0; i < n; ++i)
            for (const auto& sv : img[i]) add(sv.var);
    }
    auto oidx = [&](const std::string& v) {
        auto it = std::find(out_vars.begin(), out_vars.end(), v);
        if (it == out_vars.end()) fail("UnknownVariable", v + " is not an output variable");
        return int(it - out_vars.begin());
    };

    // Resolve each pair image into (output pair, orientation, shift).
    struct PairImage {
        int a = -1, b = -1;  // output variable indices, image = (a - b) + shift
        std::map<int, int> shift;
    };
    std::vector<PairImage> pimg(a.npairs());
    std::vector<std::pair<std::string, std::string>> out_pairs;
    for (int p = 0; p < a.npairs(); ++p) {
        std::map<int, int> lin;
        for (const auto& sv : img[a.pairs()[p].first]) lin[oidx(sv.var)] += sv.sign;
        for (const auto& sv : img[a.pairs()[p].second]) lin[oidx(sv.var)] -= sv.sign;
        std::erase_if(lin, [](const auto& kv) { return kv.second == 0; });
        bool used = false;
        for (const auto& [k, c] : a.terms())
            if (k[n + p]) used = true;
        if (!used) continue;
        auto [pa, pb] = a.pair_names(p);
        if (lin.empty()) fail("UnsupportedSubstitution", "pair (" + pa + "," + pb + ") maps to zero");
        std::vector<int> core;
        if (!spec.expand_vars.empty()) {
            for (const auto& [v, c] : lin)
                if (!spec.expand_vars.count(out_vars[v])) core.push_back(v);
        } else if (lin.size() == 2) {
            for (const auto& [v, c] : lin) core.push_back(v);
        } else {
            // Drop the common leading part of both images; the first
            // variables where they differ carry the singularity.
            const auto& ia = img[a.pairs()[p].first];
            const auto& ib = img[a.pairs()[p].second];
            std::size_t t = 0;
            while (t < ia.size() && t < ib.size() && ia[t].var == ib[t].var && ia[t].sign == ib[t].sign) ++t;
            if (t < ia.size() && t < ib.size() && ia[t].sign == 1 && ib[t].sign == 1) {
                core.push_back(oidx(ia[t].var));
                core.push_back(oidx(ib[t].var));
            }
        }
        if (core.size() != 2)
            fail("UnsupportedSubstitution", "pair (" + pa + "," + pb + ") image is not a pair plus a shift");
        PairImage pi;
        for (int v : core) {
            if (lin[v] == 1) pi.a = v;
            else if (lin[v] == -1) pi.b = v;
        }
        if (pi.a < 0 || pi.b < 0)
            fail("UnsupportedSubstitution", "pair (" + pa + "," + pb + ") image is not a difference");
        for (const auto& [v, c] : lin)
            if (v != pi.a && v != pi.b) {
                if (c != 1 && c != -1)
                    fail("UnsupportedSubstitution", "shift coefficients must be +1 or -1");
                pi.shift[v] = c;
            }
        pimg[p] = pi;
        out_pairs.push_back({out_vars[pi.a], out_vars[pi.b]});
    }
    LocalizedSeries out(a.module_ptr(), out_vars, out_pairs);

    // Window: the total ceiling survives (images are homogeneous of degree one);
    // bounds on untouched variables survive when nothing else maps into them.
    std::vector<LocalizedSeries::Group> groups;
    std::set<int> touched;
    for (int i = 0; i < n; ++i) {
        bool identity = img[i].size() == 1 && img[i][0].var == a.vars()[i];
        if (!identity)
            for (const auto& sv : img[i]) touched.insert(oidx(sv.var));
    }
    for (const auto& g : a.groups()) {
        if (int(g.vars.size()) == n) {
            std::vector<int> all(out_vars.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = int(i);
            groups.push_back({all, g.ceiling});
            continue;
        }
        std::vector<int> og;
        bool keep = true;
        for (int v : g.vars) {
            bool identity = img[v].size() == 1 && img[v][0].var == a.vars()[v];
            if (!identity) {
                keep = false;
                break;
            }
            int o = oidx(a.vars()[v]);
            if (touched.count(o)) keep = false;
            og.push_back(o);
        }
        if (keep) groups.push_back({og, g.ceiling});
    }
    for (const auto& b : spec.bounds) {
        std::vector<int> og;
        for (const auto& v : b.vars) og.push_back(oidx(v));
        groups.push_back({og, b.ceiling});
    }
    out.set_groups(groups);

    for (const auto& [k, c] : a.terms()) {
        std::vector<Factor> fs;
        Key fixed = out.zero_key();
        Q fixed_sign(1);
        for (int i = 0; i < n; ++i) {
            int e = k[i];
            if (e == 0) continue;
            if (img[i].size() == 1) {
                fixed[oidx(img[i][0].var)] += e;
                if (img[i][0].sign < 0 && (e % 2)) fixed_sign = -fixed_sign;
                continue;
            }
            // (s0 v0 + R)^e = s0^e (v0 + s0 R)^e
            Factor F;
            F.moving = true;
            F.base = out.zero_key();
            F.coord = oidx(img[i][0].var);
            F.d = e;
            int s0 = img[i][0].sign;
            for (std::size_t t = 1; t < img[i].size(); ++t) {
                Key s = out.zero_key();
                s[oidx(img[i][t].var)] = 1;
                F.shift[s] += Q(s0 * img[i][t].sign);
            }
            std::erase_if(F.shift, [](const auto& kv) { return kv.second == 0; });
            F.scale = (s0 < 0 && (e % 2)) ? Q(-1) : Q(1);
            fs.push_back(std::move(F));
        }
        for (int p = 0; p < a.npairs(); ++p) {
            int d = k[n + p];
            if (d == 0) continue;
            const PairImage& pi = pimg[p];
            int sign = 1;
            int q = out.pair_index(out_vars[pi.a], out_vars[pi.b], &sign);
            // (a - b + s)^d with (a - b) = sign * P:  sign^d (P + sign s)^d
            Factor F;
            F.moving = true;
            F.base = out.zero_key();
            F.coord = out.nvars() + q;
            F.d = d;
            for (const auto& [v, cf] : pi.shift) {
                Key s = out.zero_key();
                s[v] = 1;
                F.shift[s] += Q(sign * cf);
            }
            F.scale = (sign < 0 && (d % 2)) ? Q(-1) : Q(1);
            fs.push_back(std::move(F));
        }
        Factor head;
        head.fixed = {{fixed, fixed_sign}};
        fs.insert(fs.begin(), std::move(head));
        Expander ex(out, std::move(fs));
        ex.run(c);
    }
    out.reduce();
    return out;
}

LocalizedSeries restrict_zero(const LocalizedSeries& a, const std::string& v) {
    int i = a.var_index(v);
    if (i < 0) fail("UnknownVariable", v);
    const int n = a.nvars();
    for (const auto& [k, c] : a.terms()) {
        if (k[i] < 0) fail("SingularAtZero", "negative power of " + v);
        for (int p = 0; p < a.npairs(); ++p)
            if (k[n + p] && (a.pairs()[p].first == i || a.pairs()[p].second == i))
                fail("SingularAtZero", "difference singularity involving " + v);
    }
    std::vector<std::string> vars;
    for (int j = 0; j < n; ++j)
        if (j != i) vars.push_back(a.vars()[j]);
    std::vector<int> keep_pairs;
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int p = 0; p < a.npairs(); ++p)
        if (a.pairs()[p].first != i && a.pairs()[p].second != i) {
            keep_pairs.push_back(p);
            pairs.push_back(a.pair_names(p));
        }
    LocalizedSeries out(a.module_ptr(), vars, pairs);
    std::vector<LocalizedSeries::Group> groups;
    for (const auto& g : a.groups()) {
        std::vector<int> og;
        for (int u : g.vars)
            if (u != i) og.push_back(u > i ? u - 1 : u);
        groups.push_back({og, g.ceiling});
    }
    out.set_groups(groups);
    for (int j = 0; j < n; ++j)
        if (j != i)
            if (auto f = a.floor_vec()[j]) out.set_floor(a.vars()[j], *f);
    for (int p : keep_pairs)
        if (auto f = a.diff_floor_vec()[p]) out.set_diff_floor(a.pair_names(p).first, a.pair_names(p).second, *f);
    for (const auto& [k, c] : a.terms()) {
        if (k[i] != 0) continue;
        Key kk;
        for (int j = 0; j < n; ++j)
            if (j != i) kk.push_back(k[j]);
        for (int p : keep_pairs) kk.push_back(k[n + p]);
        out.add_term(kk, c);
    }
    return out;
}

LocalizedSeries exp_T(ModulePtr m, const Vec& b, const std::string& v, std::optional<int> ceiling) {
    LocalizedSeries out(m, {v});
    out.set_ceiling(ceiling);
    Vec cur = b;
    for (int i = 0; !cur.empty() && (!ceiling || i <= *ceiling); ++i) {
        out.add_term(Key{i}, cur);
        cur = Q(1, i + 1) * m->apply_T(cur);
    }
    return out;
}

namespace {

// Clears denominators: multiplies every term by the product of its pairs
// raised to the largest singular order present.  The result is a Laurent
// polynomial whose window is the input window shifted by that product's degree.
LocalizedSeries cleared(const LocalizedSeries& a) {
    const int n = a.nvars();
    std::vector<int> order(a.npairs(), 0);
    for (const auto& [k, c] : a.terms())
        for (int p = 0; p < a.npairs(); ++p) order[p] = std::max(order[p], -k[n + p]);
    std::vector<LocalizedSeries::Group> groups;
    for (const auto& g : a.groups()) {
        long shift = 0;
        for (int p = 0; p < a.npairs(); ++p) {
            if (!order[p]) continue;
            bool fi = in_sorted(g.vars, a.pairs()[p].first), se = in_sorted(g.vars, a.pairs()[p].second);
            if (fi != se)
                fail("IncompatibleWindows", "degree bound separates the variables of a singular pair");
            if (fi) shift += order[p];
        }
        groups.push_back({g.vars, int(g.ceiling + shift)});
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int p = 0; p < a.npairs(); ++p) pairs.push_back(a.pair_names(p));
    LocalizedSeries out(a.module_ptr(), a.vars(), pairs);
    out.set_groups(groups);
    for (const auto& [k, c] : a.terms()) {
        Key kk = k;
        for (int p = 0; p < a.npairs(); ++p) kk[n + p] += order[p];
        out.add_term(kk, c);
    }
    return out;
}

}  // namespace

bool is_zero_within(const LocalizedSeries& a) {
    if (a.terms().empty()) return true;
    if (!a.has_symbols()) return false;
    return cleared(a).terms().empty();
}

bool equal_within(const LocalizedSeries& a, const LocalizedSeries& b) { return is_zero_within(a - b); }

std::string difference_witness(const LocalizedSeries& a, const LocalizedSeries& b) {
    LocalizedSeries d = a - b;
    if (d.terms().empty()) return {};
    if (d.has_symbols()) {
        d = cleared(d);
        if (d.terms().empty()) return {};
    }
    LocalizedSeries first(d.module_ptr(), d.vars(), pair_list(d));
    int shown = 0;
    for (const auto& [k, c] : d.terms()) {
        first.add_term(k, c);
        if (++shown == 3) break;
    }
    return format_terms(first);
}

bool regular_along(const LocalizedSeries& g, const std::string& x, const std::string& y, int sub_cap) {
    return equal_within(expand_diff(g, x, y, y, sub_cap), expand_diff(g, x, y, x, sub_cap));
}

LocalizedSeries scale_var(const LocalizedSeries& a, const std::string& v, const Q& c) {
    int i = a.var_index(v);
    if (i < 0) fail("UnknownVariable", v);
    for (const auto& [k, x] : a.terms())
        for (int p = 0; p < a.npairs(); ++p)
            if (k[a.nvars() + p] && (a.pairs()[p].first == i || a.pairs()[p].second == i))
                fail("UnsupportedSubstitution", "cannot rescale a variable inside a difference symbol");
    LocalizedSeries out(a.module_ptr(), a.vars(), pair_list(a));
    out.set_window(a.window());
    for (const auto& [k, x] : a.terms()) {
        Q f(1);
        int e = k[i];
        Q base = e >= 0 ? c : Q(1) / c;
        for (int t = 0; t < std::abs(e); ++t) f *= base;
        out.add_term(k, f * x);
    }
    return out;
}

}  // namespace vertexkit
