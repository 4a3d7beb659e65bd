#include "vertexkit/family.hpp"

#include "vertexkit/errors.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <numeric>
#include <thread>

namespace vertexkit {

AlgebraFamily::AlgebraFamily(const VertexAlgebra& V, int n_max) : V_(V), n_max_(n_max) {}

const SingularMultiMap& AlgebraFamily::at(const Tree& p) {
    if (auto it = memo_.find(p); it != memo_.end()) return it->second;
    SingularMultiMap f;
    if (p.is_empty()) f = vacuum_map(V_);
    else if (p.is_leaf()) f = identity_map(V_.space_ptr());
    else if (p == Tree::flat(1)) f = unary_map(V_);
    else if (p == Tree::flat(2)) f = from_vertex_operator(V_);
    else if (p == Tree::flat(3)) f = build_ope(V_, n_max_);
    else {
        const auto& kids = p.children();
        f = at(Tree::flat(int(kids.size())));
        // right to left keeps the earlier slot numbers valid
        for (int i = int(kids.size()) - 1; i >= 0; --i)
            if (!kids[i].is_leaf()) f = compose(f, i + 1, at(kids[i]));
    }
    if (f.tree != p) fail("Unsupported", "no operator product on " + tree_format(p));
    return memo_.emplace(p, std::move(f)).first->second;
}

namespace {

// Runs independent comparisons, collecting each into its own report.
void run_tasks(std::vector<std::function<Report()>>& tasks, Report& into, int threads) {
    std::vector<Report> out(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::size_t next = 0;
    std::mutex mu;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next == tasks.size()) return;
                i = next++;
            }
            out[i] = tasks[i]();
        }
    };
    const int n = std::max(1, std::min<int>(threads, int(tasks.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& r : out) into.merge(r);
}

Report guarded(const std::string& name, const std::string& where, const std::function<Report()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        Report r;
        r.record(name, false, where + ": " + e.what());
        return r;
    }
}

std::vector<std::vector<int>> permutations(int n) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

}  // namespace

Report algebra_family_check(const VertexAlgebra& V, const FamilyOptions& opt) {
    const int n_max = opt.n_max ? *opt.n_max : (V.weight_cutoff() ? 2 * *V.weight_cutoff() : 4);
    AlgebraFamily fam(V, n_max);
    const auto trees = enumerate_trees(opt.max_leaves, opt.max_height, true);
    const std::set<Tree> in_set(trees.begin(), trees.end());
    Report r;
    for (const char* name : {"composition closure", "refinement closure", "unit law", "symmetric action"})
        r.item(name);

    // Every map is built up front; the comparisons below only read them.
    std::vector<Tree> needed = trees;
    for (const auto& p : trees)
        for (int k = 1; k <= p.leaves(); ++k) needed.push_back(graft(p, {{k, Tree::empty()}}));
    for (const auto& p : needed) {
        try {
            fam.at(p);
        } catch (const Error& e) {
            r.record("composition closure", false, tree_format(p) + ": " + e.what());
            return r;
        }
    }

    std::vector<std::function<Report()>> tasks;
    for (const auto& q : trees) {
        if (q.leaves() == 0) continue;
        for (int k = 1; k <= q.leaves(); ++k)
            for (const auto& s : trees) {
                if (s.is_leaf()) continue;
                Tree p = graft(q, {{k, s}});
                if (!in_set.count(p)) continue;
                const std::string where = tree_format(q) + " o" + std::to_string(k) + " " + tree_format(s);
                tasks.push_back([&, q, k, s, p, where] {
                    return guarded("composition closure", where, [&] {
                        return compare_maps(compose(fam.at(q), k, fam.at(s)), fam.at(p), "composition closure");
                    });
                });
            }
    }
    for (const auto& p : trees)
        for (const auto& q : trees) {
            if (p == q || p.leaves() != q.leaves() || !is_refinement(p, q)) continue;
            const std::string where = tree_format(p) + " -> " + tree_format(q);
            tasks.push_back([&, p, q, where] {
                return guarded("refinement closure", where, [&] {
                    return compare_maps(refine_map(fam.at(p), q), fam.at(q), "refinement closure");
                });
            });
        }
    for (const auto& p : trees)
        for (int k = 1; k <= p.leaves(); ++k) {
            const std::string where = tree_format(p) + " slot " + std::to_string(k);
            tasks.push_back([&, p, k, where] {
                return guarded("unit law", where, [&] {
                    return compare_maps(vacuum_insert(fam.at(p), k, V.vacuum_vec()),
                                        fam.at(graft(p, {{k, Tree::empty()}})), "unit law");
                });
            });
        }
    for (int n = 2; n <= std::min(3, opt.max_leaves); ++n)
        for (const auto& perm : permutations(n)) {
            tasks.push_back([&, n, perm] {
                return guarded("symmetric action", "flat " + std::to_string(n), [&] {
                    const SingularMultiMap& f = fam.at(Tree::flat(n));
                    std::map<std::string, std::string> names;
                    for (int i = 0; i < n; ++i)
                        names["x" + std::to_string(i + 1)] = "x" + std::to_string(perm[i] + 1);
                    SingularMultiMap g = f;
                    g.table.clear();
                    for (const auto& [t, s] : f.table) {
                        std::vector<int> u(n);
                        for (int i = 0; i < n; ++i) u[perm[i]] = t[i];
                        g.set_entry(u, s.rename(names));
                    }
                    return compare_maps(g, f, "symmetric action");
                });
            });
        }
    run_tasks(tasks, r, opt.threads);

    if (V.is_holomorphic()) {
        r.item("regular");
        for (const auto& p : trees)
            for (const auto& [t, s] : fam.at(p).table) {
                bool plain = std::none_of(s.terms().begin(), s.terms().end(), [&](const auto& kv) {
                    for (int i = s.nvars(); i < int(kv.first.size()); ++i)
                        if (kv.first[i]) return true;
                    return false;
                });
                r.record("regular", plain, tree_format(p));
            }
    }
    return r;
}

}  // namespace vertexkit
