#include "vertexkit/series.hpp"

#include "vertexkit/errors.hpp"

#include <algorithm>
#include <cstdint>

namespace vertexkit {

namespace {

bool contains(const std::vector<int>& sorted, int v) {
    return std::binary_search(sorted.begin(), sorted.end(), v);
}

}  // namespace

LocalizedSeries::LocalizedSeries(ModulePtr module, std::vector<std::string> vars,
                                 std::vector<std::pair<std::string, std::string>> pairs)
    : module_(std::move(module)), vars_(std::move(vars)) {
    for (std::size_t i = 0; i < vars_.size(); ++i)
        for (std::size_t j = i + 1; j < vars_.size(); ++j)
            if (vars_[i] == vars_[j]) fail("InvalidArgument", "duplicate variable " + vars_[i]);
    for (const auto& [a, b] : pairs) {
        int i = var_index(a), j = var_index(b);
        if (i < 0) fail("UnknownVariable", a);
        if (j < 0) fail("UnknownVariable", b);
        if (i == j) fail("UnknownPair", "(" + a + "," + b + ")");
        if (i > j) std::swap(i, j);
        if (std::find(pairs_.begin(), pairs_.end(), std::pair{i, j}) == pairs_.end()) pairs_.push_back({i, j});
    }
    std::sort(pairs_.begin(), pairs_.end());
    floors_.assign(vars_.size(), std::nullopt);
    diff_floors_.assign(pairs_.size(), std::nullopt);
}

std::pair<std::string, std::string> LocalizedSeries::pair_names(int p) const {
    return {vars_[pairs_[p].first], vars_[pairs_[p].second]};
}

int LocalizedSeries::var_index(const std::string& v) const {
    for (int i = 0; i < nvars(); ++i)
        if (vars_[i] == v) return i;
    return -1;
}

int LocalizedSeries::pair_index(const std::string& a, const std::string& b, int* sign) const {
    int i = var_index(a), j = var_index(b);
    if (i < 0 || j < 0) return -1;
    int s = 1;
    if (i > j) {
        std::swap(i, j);
        s = -1;
    }
    for (int p = 0; p < npairs(); ++p)
        if (pairs_[p] == std::pair{i, j}) {
            if (sign) *sign = s;
            return p;
        }
    return -1;
}

bool LocalizedSeries::has_symbols() const {
    for (const auto& [k, v] : terms_)
        for (int p = 0; p < npairs(); ++p)
            if (k[nvars() + p] != 0) return true;
    return false;
}

int LocalizedSeries::degree_in(const Key& key, const std::vector<int>& group) const {
    int d = 0;
    std::uint64_t mask = 0;
    for (int v : group) {
        d += key[v];
        if (v < 64) mask |= std::uint64_t(1) << v;
    }
    auto in_group = [&](int v) { return v < 64 ? bool(mask >> v & 1) : contains(group, v); };
    for (int p = 0; p < npairs(); ++p)
        if (key[nvars() + p] != 0 && in_group(pairs_[p].first) && in_group(pairs_[p].second))
            d += key[nvars() + p];
    return d;
}

bool LocalizedSeries::in_window(const Key& key) const {
    for (const auto& g : groups_)
        if (degree_in(key, g.vars) > g.ceiling) return false;
    return true;
}

void LocalizedSeries::normalize_groups() {
    std::vector<Group> out;
    for (auto& g : groups_) {
        if (g.vars.empty() && g.ceiling >= 0 && nvars() > 0) continue;
        std::sort(g.vars.begin(), g.vars.end());
        g.vars.erase(std::unique(g.vars.begin(), g.vars.end()), g.vars.end());
        auto it = std::find_if(out.begin(), out.end(), [&](const Group& h) { return h.vars == g.vars; });
        if (it == out.end()) out.push_back(g);
        else it->ceiling = std::min(it->ceiling, g.ceiling);
    }
    std::sort(out.begin(), out.end(), [](const Group& a, const Group& b) {
        if (a.vars.size() != b.vars.size()) return a.vars.size() > b.vars.size();
        return a.vars < b.vars;
    });
    groups_ = std::move(out);
}

void LocalizedSeries::restrict_to_window() {
    if (groups_.empty() || terms_.empty()) return;
    // Same test as in_window, with each group's pair list worked out once.
    struct Test {
        const Group* g;
        std::vector<int> pair_slots;
    };
    std::vector<Test> tests;
    for (const auto& g : groups_) {
        Test t{&g, {}};
        for (int p = 0; p < npairs(); ++p)
            if (contains(g.vars, pairs_[p].first) && contains(g.vars, pairs_[p].second))
                t.pair_slots.push_back(nvars() + p);
        tests.push_back(std::move(t));
    }
    std::erase_if(terms_, [&](const auto& kv) {
        const Key& k = kv.first;
        for (const auto& t : tests) {
            int d = 0;
            for (int v : t.g->vars) d += k[v];
            for (int q : t.pair_slots) d += k[q];
            if (d > t.g->ceiling) return true;
        }
        return false;
    });
}

void LocalizedSeries::add_group(std::vector<int> vars, int ceiling) {
    groups_.push_back({std::move(vars), ceiling});
    normalize_groups();
    restrict_to_window();
}

void LocalizedSeries::set_groups(std::vector<Group> g) {
    groups_ = std::move(g);
    normalize_groups();
    restrict_to_window();
}

std::optional<int> LocalizedSeries::ceiling() const {
    for (const auto& g : groups_)
        if (int(g.vars.size()) == nvars()) return g.ceiling;
    return std::nullopt;
}

void LocalizedSeries::set_ceiling(std::optional<int> n) {
    std::erase_if(groups_, [&](const Group& g) { return int(g.vars.size()) == nvars(); });
    if (n) {
        std::vector<int> all(nvars());
        for (int i = 0; i < nvars(); ++i) all[i] = i;
        groups_.push_back({all, *n});
    }
    normalize_groups();
    restrict_to_window();
}

void LocalizedSeries::add_bound(std::vector<std::string> vars, int ceiling) {
    std::vector<int> idx;
    for (const auto& v : vars) {
        int i = var_index(v);
        if (i < 0) fail("UnknownVariable", v);
        idx.push_back(i);
    }
    add_group(std::move(idx), ceiling);
}

void LocalizedSeries::set_floor(const std::string& v, int f) {
    int i = var_index(v);
    if (i < 0) fail("UnknownVariable", v);
    if (f > 0) fail("InvalidArgument", "floors must be <= 0");
    for (const auto& [k, c] : terms_)
        if (k[i] < f) fail("FloorViolation", "stored term below new floor on " + v);
    floors_[i] = f;
}

void LocalizedSeries::set_diff_floor(const std::string& a, const std::string& b, int f) {
    int p = pair_index(a, b);
    if (p < 0) fail("UnknownPair", "(" + a + "," + b + ")");
    if (f > 0) fail("InvalidArgument", "diff floors must be <= 0");
    for (const auto& [k, c] : terms_)
        if (k[nvars() + p] < f) fail("FloorViolation", "stored term below new diff floor");
    diff_floors_[p] = f;
}

Window LocalizedSeries::window() const {
    Window w;
    for (const auto& g : groups_) {
        if (int(g.vars.size()) == nvars()) {
            w.ceiling = g.ceiling;
            continue;
        }
        DegreeBound b;
        for (int v : g.vars) b.vars.push_back(vars_[v]);
        std::sort(b.vars.begin(), b.vars.end());
        b.ceiling = g.ceiling;
        w.bounds.push_back(b);
    }
    for (int i = 0; i < nvars(); ++i)
        if (floors_[i]) w.floors[vars_[i]] = *floors_[i];
    for (int p = 0; p < npairs(); ++p)
        if (diff_floors_[p]) w.diff_floors[pair_names(p)] = *diff_floors_[p];
    return w;
}

void LocalizedSeries::set_window(const Window& w) {
    groups_.clear();
    set_ceiling(w.ceiling);
    for (const auto& b : w.bounds) add_bound(b.vars, b.ceiling);
    floors_.assign(vars_.size(), std::nullopt);
    diff_floors_.assign(pairs_.size(), std::nullopt);
    for (const auto& [v, f] : w.floors) set_floor(v, f);
    for (const auto& [ab, f] : w.diff_floors) set_diff_floor(ab.first, ab.second, f);
}

// Expands non-negative pair exponents and stores the results that land in
// the window.
void LocalizedSeries::canonical_add(Key key, Vec c) {
    if (c.empty()) return;
    for (int p = 0; p < npairs(); ++p) {
        int& k = key[nvars() + p];
        if (k > 0) {
            int n = k;
            k = 0;
            auto [i, j] = pairs_[p];
            for (int m = 0; m <= n; ++m) {
                Key kk = key;
                kk[i] += n - m;
                kk[j] += m;
                Q coef = binom(n, m);
                if (m % 2) coef = -coef;
                canonical_add(std::move(kk), coef * c);
            }
            return;
        }
    }
    if (!in_window(key)) return;
    for (int i = 0; i < nvars(); ++i)
        if (floors_[i] && key[i] < *floors_[i])
            fail("FloorViolation", "term below floor on " + vars_[i]);
    for (int p = 0; p < npairs(); ++p)
        if (diff_floors_[p] && key[nvars() + p] < *diff_floors_[p])
            fail("FloorViolation", "term below diff floor");
    auto it = terms_.find(key);
    if (it == terms_.end()) {
        terms_.emplace(std::move(key), std::move(c));
    } else {
        it->second += c;
        if (it->second.empty()) terms_.erase(it);
    }
}

void LocalizedSeries::add_term(Key key, Vec c) {
    if (int(key.size()) != nvars() + npairs()) fail("InvalidArgument", "key size mismatch");
    for (const auto& [i, q] : c.entries())
        if (i < 0 || i >= module_->dim()) fail("ModuleMismatch", "coefficient outside module basis");
    canonical_add(std::move(key), std::move(c));
}

void LocalizedSeries::add_term(const std::map<std::string, int>& var_exps,
                               const std::map<std::pair<std::string, std::string>, int>& diff_exps,
                               const Vec& c) {
    Key k = zero_key();
    Vec cc = c;
    for (const auto& [v, e] : var_exps) {
        int i = var_index(v);
        if (i < 0) fail("UnknownVariable", v);
        k[i] += e;
    }
    for (const auto& [ab, e] : diff_exps) {
        int s = 1;
        int p = pair_index(ab.first, ab.second, &s);
        if (p < 0) fail("UnknownPair", "(" + ab.first + "," + ab.second + ")");
        k[nvars() + p] += e;
        if (s < 0 && (e % 2)) cc *= Q(-1);
    }
    add_term(k, cc);
}

Vec LocalizedSeries::coeff(const Key& key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? Vec{} : it->second;
}

Vec LocalizedSeries::coeff(const std::map<std::string, int>& var_exps,
                           const std::map<std::pair<std::string, std::string>, int>& diff_exps) const {
    Key k = zero_key();
    Q sign(1);
    for (const auto& [v, e] : var_exps) {
        int i = var_index(v);
        if (i < 0) return {};
        k[i] += e;
    }
    for (const auto& [ab, e] : diff_exps) {
        int s = 1;
        int p = pair_index(ab.first, ab.second, &s);
        if (p < 0) return {};
        k[nvars() + p] += e;
        if (s < 0 && (e % 2)) sign = -sign;
    }
    return sign * coeff(k);
}

namespace {

// Var indices of `from` expressed in `to`.
std::vector<int> var_map(const LocalizedSeries& from, const std::vector<std::string>& to) {
    std::vector<int> m;
    for (const auto& v : from.vars()) {
        auto it = std::find(to.begin(), to.end(), v);
        if (it == to.end()) fail("UnknownVariable", v + " missing from target variable list");
        m.push_back(int(it - to.begin()));
    }
    return m;
}

}  // namespace

LocalizedSeries LocalizedSeries::embed(const std::vector<std::string>& vars,
                                       const std::vector<std::pair<std::string, std::string>>& pairs) const {
    LocalizedSeries out(module_, vars, pairs);
    auto vm = var_map(*this, vars);
    std::vector<int> pm;
    std::vector<int> psign;
    for (int p = 0; p < npairs(); ++p) {
        auto [a, b] = pair_names(p);
        int s = 1;
        int q = out.pair_index(a, b, &s);
        if (q < 0) fail("UnknownPair", "(" + a + "," + b + ") missing from target pair list");
        pm.push_back(q);
        psign.push_back(s);
    }
    for (const auto& g : groups_) {
        std::vector<int> idx;
        for (int v : g.vars) idx.push_back(vm[v]);
        std::sort(idx.begin(), idx.end());
        out.groups_.push_back({idx, g.ceiling});
    }
    out.normalize_groups();
    for (int i = 0; i < nvars(); ++i) out.floors_[vm[i]] = floors_[i];
    for (int p = 0; p < npairs(); ++p) out.diff_floors_[pm[p]] = diff_floors_[p];
    for (const auto& [k, c] : terms_) {
        Key kk = out.zero_key();
        bool flip = false;
        for (int i = 0; i < nvars(); ++i) kk[vm[i]] = k[i];
        for (int p = 0; p < npairs(); ++p) {
            kk[out.nvars() + pm[p]] = k[nvars() + p];
            if (psign[p] < 0 && (k[nvars() + p] % 2)) flip = !flip;
        }
        out.terms_[kk] += flip ? Q(-1) * c : c;
    }
    std::erase_if(out.terms_, [](const auto& kv) { return kv.second.empty(); });
    out.reduce();
    return out;
}

LocalizedSeries LocalizedSeries::rename(const std::map<std::string, std::string>& names) const {
    std::vector<std::string> nv;
    for (const auto& v : vars_) {
        auto it = names.find(v);
        nv.push_back(it == names.end() ? v : it->second);
    }
    // Positions are kept, so pair orientation follows the old declaration order.
    LocalizedSeries out = *this;
    out.vars_ = nv;
    for (std::size_t i = 0; i < nv.size(); ++i)
        for (std::size_t j = i + 1; j < nv.size(); ++j)
            if (nv[i] == nv[j]) fail("InvalidArgument", "rename is not injective");
    return out;
}

void LocalizedSeries::prune_declarations() {
    std::vector<bool> used_pair(npairs(), false);
    for (const auto& [k, c] : terms_)
        for (int p = 0; p < npairs(); ++p)
            if (k[nvars() + p]) used_pair[p] = true;
    std::vector<std::pair<std::string, std::string>> keep;
    for (int p = 0; p < npairs(); ++p)
        if (used_pair[p]) keep.push_back(pair_names(p));
    if (int(keep.size()) == npairs()) return;
    LocalizedSeries out(module_, vars_, keep);
    out.groups_ = groups_;
    out.floors_ = floors_;
    for (int p = 0; p < npairs(); ++p)
        if (used_pair[p]) {
            auto [a, b] = pair_names(p);
            out.diff_floors_[out.pair_index(a, b)] = diff_floors_[p];
        }
    for (const auto& [k, c] : terms_) {
        Key kk(k.begin(), k.begin() + nvars());
        for (int p = 0; p < npairs(); ++p)
            if (used_pair[p]) kk.push_back(k[nvars() + p]);
        out.terms_[kk] = c;
    }
    *this = std::move(out);
}

LocalizedSeries LocalizedSeries::with_module(ModulePtr m) const {
    if (m->dim() < module_->dim()) fail("ModuleMismatch", "target module too small");
    LocalizedSeries out = *this;
    out.module_ = std::move(m);
    return out;
}

bool LocalizedSeries::same_representation(const LocalizedSeries& o) const {
    if (vars_ != o.vars_ || pairs_ != o.pairs_ || terms_ != o.terms_) return false;
    if (module_ != o.module_ && module_->basis() != o.module_->basis()) return false;
    if (groups_.size() != o.groups_.size()) return false;
    for (std::size_t i = 0; i < groups_.size(); ++i)
        if (groups_[i].vars != o.groups_[i].vars || groups_[i].ceiling != o.groups_[i].ceiling) return false;
    return floors_ == o.floors_ && diff_floors_ == o.diff_floors_;
}

void LocalizedSeries::reduce() {
    if (pairs_.empty()) return;
    const int n = nvars();
    auto reduced = [&](const auto& term) {
        for (int p = 0; p < npairs(); ++p)
            if (term.first[n + p] < 0 && term.first[pairs_[p].first] != 0) return false;
        return true;
    };
    if (std::all_of(terms_.begin(), terms_.end(), reduced)) {
        restrict_to_window();
        return;
    }
    std::vector<std::pair<Key, Vec>> work(terms_.begin(), terms_.end());
    std::map<Key, Vec> done;
    while (!work.empty()) {
        auto [k, c] = std::move(work.back());
        work.pop_back();
        int hit = -1;
        for (int p = 0; p < npairs() && hit < 0; ++p)
            if (k[n + p] < 0 && k[pairs_[p].first] != 0) hit = p;
        if (hit >= 0 && k[pairs_[hit].first] < 0) {
            // x_i^-1 (x_i - x_j)^-1 = x_j^-1 ((x_i - x_j)^-1 - x_i^-1)
            auto [i, j] = pairs_[hit];
            Key k1 = k;
            k1[i] += 1;
            k1[j] -= 1;
            Key k2 = k;
            k2[n + hit] += 1;
            k2[j] -= 1;
            work.emplace_back(std::move(k1), c);
            work.emplace_back(std::move(k2), Q(-1) * c);
            continue;
        }
        if (hit < 0) {
            auto [it, fresh] = done.emplace(k, c);
            if (!fresh) {
                it->second += c;
                if (it->second.empty()) done.erase(it);
            }
            continue;
        }
        auto [i, j] = pairs_[hit];
        int e = k[i];
        int d = k[n + hit];
        for (int m = 0; m <= e; ++m) {
            // x_i^e = sum_m C(e,m) (x_i - x_j)^m x_j^(e-m)
            Key kk = k;
            kk[i] = 0;
            kk[j] += e - m;
            Vec cc = binom(e, m) * c;
            int nd = d + m;
            if (nd < 0) {
                kk[n + hit] = nd;
                work.emplace_back(std::move(kk), std::move(cc));
            } else {
                kk[n + hit] = 0;
                for (int t = 0; t <= nd; ++t) {
                    Key k3 = kk;
                    k3[i] += nd - t;
                    k3[j] += t;
                    Q s = binom(nd, t);
                    if (t % 2) s = -s;
                    work.emplace_back(std::move(k3), s * cc);
                }
            }
        }
    }
    terms_ = std::move(done);
    restrict_to_window();
}

namespace {

// Support variables: those some stored term or some bound involves.
std::vector<bool> support(const LocalizedSeries& s) {
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

}  // namespace

std::pair<LocalizedSeries, LocalizedSeries> unify(const LocalizedSeries& a, const LocalizedSeries& b) {
    if (&a.module() != &b.module() && a.module().basis() != b.module().basis())
        fail("IncompatibleWindows", "series over different modules (" + a.module().name() + ", " +
                                         b.module().name() + ")");
    if (a.vars() == b.vars() && a.pairs() == b.pairs()) return {a, b};
    std::vector<std::string> vars = a.vars();
    for (const auto& v : b.vars())
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int p = 0; p < a.npairs(); ++p) pairs.push_back(a.pair_names(p));
    for (int p = 0; p < b.npairs(); ++p) pairs.push_back(b.pair_names(p));
    return {a.embed(vars, pairs), b.embed(vars, pairs)};
}

LocalizedSeries& LocalizedSeries::operator+=(const LocalizedSeries& o) {
    if (vars_ != o.vars_ || pairs_ != o.pairs_) {
        auto [a, b] = unify(*this, o);
        *this = std::move(a);
        return *this += b;
    }
    if (module_ != o.module_ && module_->basis() != o.module_->basis())
        fail("IncompatibleWindows", "series over different modules (" + module_->name() + ", " + o.module_->name() + ")");
    LocalizedSeries& a = *this;
    const LocalizedSeries& b = o;
    auto sa = support(a);
    auto sb = support(b);
    for (const auto& g : b.groups_) a.groups_.push_back(g);
    a.normalize_groups();
    // Support bounds of a sum: the weaker of the two, where both are known.
    for (int i = 0; i < a.nvars(); ++i) {
        std::optional<int> fa = a.floors_[i], fb = b.floors_[i];
        if (!fa && !fb) continue;
        if (!fa && !sa[i]) fa = 0;
        if (!fb && !sb[i]) fb = 0;
        a.floors_[i] = (fa && fb) ? std::optional<int>(std::min(*fa, *fb)) : std::nullopt;
    }
    for (int p = 0; p < a.npairs(); ++p) {
        auto fa = a.diff_floors_[p], fb = b.diff_floors_[p];
        a.diff_floors_[p] = (fa && fb) ? std::optional<int>(std::min(*fa, *fb)) : std::nullopt;
    }
    for (const auto& [k, c] : b.terms_) {
        auto [it, fresh] = a.terms_.emplace(k, c);
        if (!fresh) {
            it->second += c;
            if (it->second.empty()) a.terms_.erase(it);
        }
    }
    a.restrict_to_window();
    a.reduce();
    return *this;
}

LocalizedSeries& LocalizedSeries::operator-=(const LocalizedSeries& o) {
    LocalizedSeries neg = o;
    neg *= Q(-1);
    return *this += neg;
}

LocalizedSeries& LocalizedSeries::operator*=(const Q& c) {
    if (c == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [k, v] : terms_) v *= c;
    return *this;
}

LocalizedSeries series_constant(ModulePtr m, const Vec& v, std::vector<std::string> vars) {
    LocalizedSeries s(std::move(m), std::move(vars));
    s.add_term(s.zero_key(), v);
    return s;
}

LocalizedSeries scalar_monomial(std::vector<std::string> vars, const std::map<std::string, int>& exps, const Q& c) {
    LocalizedSeries s(GModule::scalars(), std::move(vars));
    s.add_term(exps, {}, Vec::unit(0, c));
    return s;
}

}  // namespace vertexkit
