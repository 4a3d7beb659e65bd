#include <doctest.h>

#include "vertexkit/errors.hpp"
#include "vertexkit/trees.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <random>
#include <set>

using namespace vertexkit;

namespace {

Tree T(const std::string& s) { return tree_parse(s); }

// Mutable mirror of Tree for the move-graph search.
struct Raw {
    bool leaf = false;
    std::vector<Raw> kids;
};

Raw to_raw(const Tree& t) {
    Raw r;
    r.leaf = t.is_leaf();
    for (const auto& c : t.children()) r.kids.push_back(to_raw(c));
    return r;
}

std::string raw_format(const Raw& r) {
    if (r.leaf) return ".";
    std::string s = "(";
    for (const auto& k : r.kids) s += raw_format(k);
    return s + ")";
}

Tree from_raw(const Raw& r) {
    if (r.leaf) return Tree::leaf();
    std::vector<Tree> kids;
    for (const auto& k : r.kids) kids.push_back(from_raw(k));
    return Tree::node(kids);
}

int raw_nodes(const Raw& r) {
    if (r.leaf) return 0;
    int n = 1;
    for (const auto& k : r.kids) n += raw_nodes(k);
    return n;
}

// Every tree one move away: contract an edge between two internal nodes, or
// wrap an internal node in a new unary parent.
void neighbours(Raw& r, Raw& root, std::vector<std::string>& out) {
    if (r.leaf) return;
    Raw saved = r;
    Raw wrapped;
    wrapped.kids.push_back(r);
    r = wrapped;
    out.push_back(raw_format(root));
    r = saved;
    for (std::size_t i = 0; i < r.kids.size(); ++i) {
        if (r.kids[i].leaf) continue;
        Raw before = r;
        std::vector<Raw> kids(r.kids.begin(), r.kids.begin() + i);
        kids.insert(kids.end(), r.kids[i].kids.begin(), r.kids[i].kids.end());
        kids.insert(kids.end(), r.kids.begin() + i + 1, r.kids.end());
        r.kids = kids;
        out.push_back(raw_format(root));
        r = before;
    }
    for (auto& k : r.kids) neighbours(k, root, out);
}

// Breadth-first search from q over the move graph.  Contracting first and
// wrapping afterwards never needs more nodes than the larger endpoint.
bool reachable(const Tree& q, const Tree& p) {
    if (!p.is_node() || !q.is_node()) return p == q;
    if (p.leaves() != q.leaves()) return false;
    const int bound = std::max(raw_nodes(to_raw(p)), raw_nodes(to_raw(q)));
    std::set<std::string> seen{tree_format(q)};
    std::deque<Raw> todo{to_raw(q)};
    const std::string goal = raw_format(to_raw(p));
    while (!todo.empty()) {
        Raw cur = todo.front();
        todo.pop_front();
        if (raw_format(cur) == goal) return true;
        std::vector<std::string> next;
        neighbours(cur, cur, next);
        for (const auto& s : next) {
            Raw n = to_raw(tree_parse(s));
            if (raw_nodes(n) > bound) continue;
            if (seen.insert(s).second) todo.push_back(n);
        }
    }
    return false;
}

// Linear extensions counted over the lattice of down-closed node sets.
std::size_t brute_extensions(const Tree& t) {
    auto a = assign_vars(t);
    const std::size_t n = a.nodes.size();
    std::vector<int> parent(n, -1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const auto& pi = a.nodes[i].path;
            const auto& pj = a.nodes[j].path;
            if (pj.size() + 1 == pi.size() && std::equal(pj.begin(), pj.end(), pi.begin())) parent[i] = int(j);
        }
    std::vector<std::size_t> ways(std::size_t(1) << n, 0);
    ways.back() = 1;
    for (std::size_t mask = ways.size() - 1; mask-- > 0;)
        for (std::size_t i = 0; i < n; ++i)
            if (!(mask >> i & 1) && (parent[i] < 0 || (mask >> parent[i] & 1))) ways[mask] += ways[mask | std::size_t(1) << i];
    return ways[0];
}

// Trees with exactly n leaves and height <= h.
long count_trees(int n, int h) {
    if (n <= 0) return 0;
    long c = n == 1 ? 1 : 0;
    if (h == 0) return c;
    // compositions of n into parts, each part a tree of height <= h-1
    std::vector<long> ways(n + 1, 0);
    ways[0] = 1;
    for (int m = 1; m <= n; ++m)
        for (int part = 1; part <= m; ++part) ways[m] += ways[m - part] * count_trees(part, h - 1);
    return c + ways[n];
}

}  // namespace

TEST_CASE("tree notation") {
    Tree flat3 = T("(...)");
    CHECK(flat3 == Tree::flat(3));
    CHECK(flat3.is_flat());
    Tree left3 = T("((..).)");
    CHECK(left3.leaves() == 3);
    CHECK(left3.height() == 2);
    Tree ht2 = T("((..)(..))");
    CHECK(ht2.leaves() == 4);
    CHECK(ht2.internal_nodes() == 3);
    CHECK(T("o").is_empty());
    CHECK(T(".").is_leaf());
    CHECK(T("(.)") == T("|."));
    CHECK(tree_format(T("(.)")) == "|.");
    CHECK(T(" ( ( . . ) . ) ") == left3);
    for (const char* s : {"", "(", "(..", "()", "(.o)", "x", "..", "(..))", "|"})
        CHECK_THROWS_AS(T(s), Error);
}

TEST_CASE("notation round trip over enumerated trees") {
    for (const auto& t : enumerate_trees(5, 3)) CHECK(tree_parse(tree_format(t)) == t);
}

TEST_CASE("enumeration counts") {
    for (int L = 1; L <= 4; ++L)
        for (int h = 0; h <= 3; ++h) {
            long expect = 1;  // the empty tree
            for (int n = 1; n <= L; ++n) expect += count_trees(n, h);
            auto all = enumerate_trees(L, h);
            CHECK(long(all.size()) == expect);
            CHECK(std::is_sorted(all.begin(), all.end()));
        }
    CHECK(enumerate_trees(3, 2).size() == 22);
    CHECK(enumerate_trees(3, 2, false).size() == 21);
}

TEST_CASE("edge variables") {
    auto a = assign_vars(T("((..).)"));
    REQUIRE(a.nodes.size() == 2);
    CHECK(a.nodes[0].incoming == std::vector<std::string>{"x1", "x2"});
    CHECK(a.nodes[1].incoming == std::vector<std::string>{"y1", "y2"});
    CHECK(a.nodes[1].outgoing == "x1");
    CHECK(a.leaf_vars == std::vector<std::string>{"y1", "y2", "x2"});
    CHECK(a.depth_of("y2") == 2);

    auto b = assign_vars(T("((..)(..))"));
    CHECK(b.leaf_vars == std::vector<std::string>{"y1", "y2", "z1", "z2"});
    int child = 0;
    CHECK(b.owner_of("z2", &child)->letter == "z");
    CHECK(child == 1);
    CHECK(b.all_vars().size() == 6);
    CHECK(b.root_vars() == std::vector<std::string>{"x1", "x2"});
    CHECK_THROWS_AS(b.depth_of("w1"), Error);

    // variables never repeat
    for (const auto& t : enumerate_trees(5, 3)) {
        auto v = assign_vars(t).all_vars();
        CHECK(std::set<std::string>(v.begin(), v.end()).size() == v.size());
    }
}

TEST_CASE("allowed singularities") {
    Tree left3 = T("((..).)");
    auto s = allowed_singularities(left3, assign_vars(left3));
    REQUIRE(s.size() == 2);
    CHECK(s[0].a == "x1");
    CHECK(s[0].b == "x2");
    CHECK(s[0].scope == std::vector<int>{1, 2, 3});
    CHECK(s[1].a == "y1");
    CHECK(s[1].b == "y2");
    CHECK(s[1].scope == std::vector<int>{1, 2});

    Tree flat3 = T("(...)");
    auto f = allowed_singularities(flat3, assign_vars(flat3));
    CHECK(f.size() == 3);
    for (const auto& p : f) CHECK(p.scope == std::vector<int>{1, 2, 3});

    Tree ht2 = T("((..)(..))");
    auto h = allowed_singularities(ht2, assign_vars(ht2));
    REQUIRE(h.size() == 3);
    CHECK(h[1].a == "y1");
    CHECK(h[1].scope == std::vector<int>{1, 2});
    CHECK(h[2].a == "z1");
    CHECK(h[2].scope == std::vector<int>{3, 4});
    CHECK(h[0].scope.size() == 4);

    CHECK(allowed_singularities(T("|(..)"), assign_vars(T("|(..)"))).size() == 1);
}

TEST_CASE("refinement examples") {
    CHECK(is_refinement(T("(...)"), T("((..).)")));
    CHECK_FALSE(is_refinement(T("((..).)"), T("(...)")));
    CHECK(is_refinement(T("((..).)"), T("((..).)")));
    CHECK_FALSE(is_refinement(T("(...)"), T("(..)")));
    CHECK(is_refinement(T("(..)"), T("|(..)")));
    CHECK_FALSE(is_refinement(T("((..).)"), T("(.(..))")));
    CHECK(is_refinement(T("."), T(".")));
    CHECK(is_refinement(T("o"), T("o")));
    CHECK_FALSE(is_refinement(T("."), T("|.")));
}

TEST_CASE("refinement agrees with the move-graph search") {
    auto all = enumerate_trees(4, 3, false);
    std::mt19937 rng(7);
    int checked = 0;
    for (const auto& q : all)
        for (const auto& p : all) {
            if (p.leaves() != q.leaves() || p.internal_nodes() > 4 || q.internal_nodes() > 4) continue;
            if (rng() % 8) continue;
            INFO(tree_format(p) << " vs " << tree_format(q));
            CHECK(is_refinement(p, q) == reachable(q, p));
            ++checked;
        }
    CHECK(checked > 40);
}

TEST_CASE("refinement is a preorder and flat trees refine everything") {
    auto all = enumerate_trees(4, 2, false);
    for (const auto& a : all) {
        CHECK(is_refinement(a, a));
        if (a.is_node()) CHECK(is_refinement(Tree::flat(a.leaves()), a));
        for (const auto& b : all)
            if (is_refinement(a, b))
                for (const auto& c : all)
                    if (is_refinement(b, c)) CHECK(is_refinement(a, c));
    }
}

TEST_CASE("grafting examples") {
    CHECK(graft(T("(..)"), {{1, T("(..)")}}) == T("((..).)"));
    for (const auto& p : enumerate_trees(4, 2, false))
        for (int k = 1; k <= p.leaves(); ++k) CHECK(graft(p, {{k, T(".")}}) == p);
    CHECK(graft(T("(..)"), {{1, T("o")}}) == T("|."));
    CHECK(graft(T("(..)"), {{1, T("o")}, {2, T("o")}}) == T("o"));
    CHECK(graft(T("."), {{1, T("(...)")}}) == T("(...)"));
    CHECK(graft(T("(..)"), {{1, T("(..)")}, {2, T("(..)")}}) == T("((..)(..))"));
    CHECK_THROWS_AS(graft(T("(..)"), {{3, T(".")}}), Error);
    CHECK_THROWS_AS(graft(T("(..)"), {{1, T(".")}, {1, T(".")}}), Error);
}

TEST_CASE("grafting tracks variables") {
    auto r = graft_tracked(T("(..)"), {{1, T("(..)")}});
    CHECK(r.outer_vars.at("x1") == "x1");
    CHECK(r.outer_vars.at("x2") == "x2");
    CHECK(r.inner_vars[0].at("x1") == "y1");
    CHECK(r.inner_vars[0].at("x2") == "y2");

    auto s = graft_tracked(T("(...)"), {{2, T("o")}});
    CHECK(s.tree == T("(..)"));
    CHECK(s.outer_vars.at("x1") == "x1");
    CHECK(s.outer_vars.at("x3") == "x2");
    CHECK(s.outer_vars.count("x2") == 0);
}

TEST_CASE("grafting is associative") {
    auto all = enumerate_trees(3, 2);
    std::mt19937 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        Tree q = all[rng() % all.size()];
        if (q.leaves() == 0) continue;
        Tree p = all[rng() % all.size()];
        Tree r = all[rng() % all.size()];
        int i = 1 + int(rng() % q.leaves());
        if (p.leaves() == 0) {
            CHECK(graft(q, {{i, p}}).leaves() == q.leaves() - 1);
            continue;
        }
        int j = 1 + int(rng() % p.leaves());
        Tree nested = graft(q, {{i, graft(p, {{j, r}})}});
        Tree stepwise = graft(graft(q, {{i, p}}), {{i + j - 1, r}});
        CHECK(nested == stepwise);
        // simultaneous grafting at two leaves equals grafting one at a time
        if (q.leaves() >= 2) {
            int k = i == q.leaves() ? 1 : q.leaves();
            Tree both = graft(q, {{i, p}, {k, r}});
            int shift = k > i ? p.leaves() - 1 : 0;
            Tree one = graft(graft(q, {{k, r}}), {{i + (k < i ? r.leaves() - 1 : 0), p}});
            Tree other = graft(graft(q, {{i, p}}), {{k + shift, r}});
            CHECK(both == one);
            CHECK(both == other);
        }
    }
}

TEST_CASE("linear extensions") {
    auto e = linear_extensions(T("((..)(..))"));
    REQUIRE(e.size() == 2);
    CHECK(format_extension(e[0]) == "bot < x < y < z");
    CHECK(format_extension(e[1]) == "bot < x < z < y");
    CHECK(linear_extensions(T("((..).)")).size() == 1);
    for (int n = 1; n <= 5; ++n) CHECK(linear_extensions(Tree::flat(n)).size() == 1);
    for (const auto& t : enumerate_trees(5, 3)) {
        auto ext = linear_extensions(t);
        CHECK(ext.size() == brute_extensions(t));
        CHECK(std::all_of(ext.begin(), ext.end(), [](const auto& o) { return o.front() == "bot"; }));
    }
}
