#include "vertexkit/trees.hpp"

#include "vertexkit/errors.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>

namespace vertexkit {

Tree Tree::leaf() {
    Tree t;
    t.kind_ = Kind::Leaf;
    return t;
}

Tree Tree::node(std::vector<Tree> children) {
    std::erase_if(children, [](const Tree& c) { return c.is_empty(); });
    Tree t;
    if (children.empty()) return t;
    t.kind_ = Kind::Node;
    t.children_ = std::move(children);
    return t;
}

Tree Tree::flat(int n) {
    if (n < 0) fail("IndexOutOfRange", "negative leaf count");
    return node(std::vector<Tree>(n, leaf()));
}

int Tree::leaves() const {
    if (kind_ == Kind::Leaf) return 1;
    int n = 0;
    for (const auto& c : children_) n += c.leaves();
    return n;
}

int Tree::height() const {
    if (kind_ != Kind::Node) return 0;
    int h = 0;
    for (const auto& c : children_) h = std::max(h, c.height());
    return h + 1;
}

int Tree::internal_nodes() const {
    if (kind_ != Kind::Node) return 0;
    int n = 1;
    for (const auto& c : children_) n += c.internal_nodes();
    return n;
}

bool Tree::is_flat() const {
    return is_node() && std::all_of(children_.begin(), children_.end(), [](const Tree& c) { return c.is_leaf(); });
}

std::strong_ordering operator<=>(const Tree& a, const Tree& b) { return tree_format(a) <=> tree_format(b); }

std::string tree_format(const Tree& t) {
    switch (t.kind()) {
        case Tree::Kind::Empty: return "o";
        case Tree::Kind::Leaf: return ".";
        case Tree::Kind::Node: break;
    }
    if (t.children().size() == 1) return "|" + tree_format(t.children()[0]);
    std::string s = "(";
    for (const auto& c : t.children()) s += tree_format(c);
    return s + ")";
}

namespace {

struct TreeParser {
    const std::string& s;
    std::size_t i = 0;

    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    [[noreturn]] void error(const std::string& what) {
        fail("ParseError", what + " at position " + std::to_string(i) + " in tree '" + s + "'");
    }
    Tree subtree() {
        skip();
        if (i >= s.size()) error("unexpected end");
        char c = s[i++];
        if (c == '.') return Tree::leaf();
        if (c == '|') return Tree::node({subtree()});
        if (c == '(') {
            std::vector<Tree> kids;
            for (;;) {
                skip();
                if (i >= s.size()) error("unbalanced parenthesis");
                if (s[i] == ')') {
                    ++i;
                    break;
                }
                if (s[i] == 'o') error("empty tree inside a node");
                kids.push_back(subtree());
            }
            if (kids.empty()) error("node without children");
            return Tree::node(std::move(kids));
        }
        --i;
        error(std::string("unexpected '") + c + "'");
    }
};

const char* kLetters[] = {"x", "y", "z", "w", "u", "v", "s", "r", "q", "p"};

std::string letter_for(int k) {
    if (k < int(std::size(kLetters))) return kLetters[k];
    return "n" + std::to_string(k) + "_";
}

}  // namespace

Tree tree_parse(const std::string& text) {
    TreeParser p{text};
    p.skip();
    if (p.i < text.size() && text[p.i] == 'o') {
        ++p.i;
        p.skip();
        if (p.i != text.size()) p.error("trailing input");
        return Tree::empty();
    }
    Tree t = p.subtree();
    p.skip();
    if (p.i != text.size()) p.error("trailing input");
    return t;
}

std::vector<std::string> EdgeVarAssignment::all_vars() const {
    std::vector<std::string> out;
    for (const auto& n : nodes) out.insert(out.end(), n.incoming.begin(), n.incoming.end());
    return out;
}

std::vector<std::string> EdgeVarAssignment::root_vars() const {
    return nodes.empty() ? std::vector<std::string>{} : nodes[0].incoming;
}

const NodeVars* EdgeVarAssignment::find(const NodePath& p) const {
    for (const auto& n : nodes)
        if (n.path == p) return &n;
    return nullptr;
}

const NodeVars* EdgeVarAssignment::owner_of(const std::string& var, int* child) const {
    for (const auto& n : nodes)
        for (std::size_t i = 0; i < n.incoming.size(); ++i)
            if (n.incoming[i] == var) {
                if (child) *child = int(i);
                return &n;
            }
    return nullptr;
}

int EdgeVarAssignment::depth_of(const std::string& var) const {
    const NodeVars* n = owner_of(var);
    if (!n) fail("UnknownVariable", var);
    return n->depth;
}

EdgeVarAssignment assign_vars(const Tree& t) {
    EdgeVarAssignment a;
    if (t.is_empty()) return a;
    if (t.is_leaf()) {
        a.leaf_vars = {""};
        return a;
    }
    // Leaf positions per node, by depth-first walk.
    std::map<NodePath, std::vector<int>> under;
    std::map<NodePath, int> leaf_at;
    int next_leaf = 1;
    std::function<std::vector<int>(const Tree&, NodePath&)> walk = [&](const Tree& s, NodePath& p) {
        if (s.is_leaf()) {
            leaf_at[p] = next_leaf;
            return std::vector<int>{next_leaf++};
        }
        std::vector<int> all;
        for (std::size_t i = 0; i < s.children().size(); ++i) {
            p.push_back(int(i));
            auto l = walk(s.children()[i], p);
            p.pop_back();
            all.insert(all.end(), l.begin(), l.end());
        }
        under[p] = all;
        return all;
    };
    NodePath root;
    walk(t, root);

    std::deque<std::tuple<const Tree*, NodePath, std::string, int>> queue{{&t, {}, "", 1}};
    int k = 0;
    std::map<int, std::string> leaf_var;
    while (!queue.empty()) {
        auto [s, path, out, depth] = queue.front();
        queue.pop_front();
        NodeVars nv;
        nv.path = path;
        nv.letter = letter_for(k++);
        nv.outgoing = out;
        nv.leaves = under[path];
        nv.depth = depth;
        for (std::size_t i = 0; i < s->children().size(); ++i) {
            nv.incoming.push_back(nv.letter + std::to_string(i + 1));
            const Tree& c = s->children()[i];
            NodePath cp = path;
            cp.push_back(int(i));
            if (c.is_node()) queue.emplace_back(&c, cp, nv.incoming.back(), depth + 1);
            else leaf_var[leaf_at[cp]] = nv.incoming.back();
        }
        a.nodes.push_back(std::move(nv));
    }
    for (const auto& [i, v] : leaf_var) a.leaf_vars.push_back(v);
    return a;
}

std::vector<AllowedPair> allowed_singularities(const Tree&, const EdgeVarAssignment& a) {
    std::vector<AllowedPair> out;
    for (const auto& n : a.nodes)
        for (std::size_t i = 0; i < n.incoming.size(); ++i)
            for (std::size_t j = i + 1; j < n.incoming.size(); ++j)
                out.push_back({n.incoming[i], n.incoming[j], n.leaves, n.path});
    return out;
}

std::string format_extension(const std::vector<std::string>& order) {
    std::string s;
    for (std::size_t i = 0; i < order.size(); ++i) s += (i ? " < " : "") + order[i];
    return s;
}

std::vector<std::vector<std::string>> linear_extensions(const Tree& t) {
    EdgeVarAssignment a = assign_vars(t);
    std::vector<std::vector<std::string>> out;
    if (a.nodes.empty()) return {{"bot"}};
    const int n = int(a.nodes.size());
    std::vector<int> parent(n, -1);
    for (int i = 1; i < n; ++i) {
        NodePath pp(a.nodes[i].path.begin(), a.nodes[i].path.end() - 1);
        for (int j = 0; j < n; ++j)
            if (a.nodes[j].path == pp) parent[i] = j;
    }
    std::vector<bool> placed(n, false);
    std::vector<std::string> cur{"bot"};
    std::function<void()> rec = [&]() {
        if (int(cur.size()) == n + 1) {
            out.push_back(cur);
            return;
        }
        for (int i = 0; i < n; ++i) {
            if (placed[i] || (parent[i] >= 0 && !placed[parent[i]])) continue;
            placed[i] = true;
            cur.push_back(a.nodes[i].letter);
            rec();
            cur.pop_back();
            placed[i] = false;
        }
    };
    rec();
    std::vector<std::pair<std::string, std::size_t>> keys;
    for (std::size_t i = 0; i < out.size(); ++i) keys.emplace_back(format_extension(out[i]), i);
    std::sort(keys.begin(), keys.end());
    std::vector<std::vector<std::string>> sorted;
    sorted.reserve(out.size());
    for (const auto& [k, i] : keys) sorted.push_back(std::move(out[i]));
    return sorted;
}

std::set<std::pair<int, int>> clusters(const Tree& t) {
    std::set<std::pair<int, int>> out;
    for (const auto& n : assign_vars(t).nodes) out.insert({n.leaves.front(), n.leaves.back()});
    return out;
}

bool is_refinement(const Tree& p, const Tree& q) {
    if (p.leaves() != q.leaves()) return false;
    if (!p.is_node() || !q.is_node()) return p == q;
    auto cp = clusters(p);
    auto cq = clusters(q);
    return std::includes(cq.begin(), cq.end(), cp.begin(), cp.end());
}

namespace {

// Tree whose edges carry the names they had before grafting.
struct Labelled {
    Tree::Kind kind = Tree::Kind::Empty;
    std::vector<Labelled> kids;
    std::vector<std::string> labels;
};

Labelled label(const Tree& t, const EdgeVarAssignment& a, const std::string& tag, NodePath& path) {
    Labelled l;
    l.kind = t.kind();
    if (!t.is_node()) return l;
    const NodeVars* nv = a.find(path);
    for (std::size_t i = 0; i < t.children().size(); ++i) {
        path.push_back(int(i));
        l.kids.push_back(label(t.children()[i], a, tag, path));
        path.pop_back();
        l.labels.push_back(tag + nv->incoming[i]);
    }
    return l;
}

Labelled label(const Tree& t, const std::string& tag) {
    NodePath p;
    return label(t, assign_vars(t), tag, p);
}

void substitute(Labelled& l, const std::map<int, Labelled>& at, int& leaf) {
    for (auto& k : l.kids) {
        if (k.kind == Tree::Kind::Leaf) {
            auto it = at.find(leaf++);
            if (it != at.end() && it->second.kind != Tree::Kind::Leaf) k = it->second;
        } else {
            substitute(k, at, leaf);
        }
    }
}

// Drops empty children and childless nodes.
void prune(Labelled& l) {
    for (auto& k : l.kids) prune(k);
    std::vector<Labelled> kids;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < l.kids.size(); ++i)
        if (l.kids[i].kind != Tree::Kind::Empty) {
            kids.push_back(std::move(l.kids[i]));
            labels.push_back(l.labels[i]);
        }
    l.kids = std::move(kids);
    l.labels = std::move(labels);
    if (l.kind == Tree::Kind::Node && l.kids.empty()) l.kind = Tree::Kind::Empty;
}

Tree strip(const Labelled& l) {
    if (l.kind == Tree::Kind::Leaf) return Tree::leaf();
    if (l.kind == Tree::Kind::Empty) return Tree::empty();
    std::vector<Tree> kids;
    for (const auto& k : l.kids) kids.push_back(strip(k));
    return Tree::node(std::move(kids));
}

void collect(const Labelled& l, const EdgeVarAssignment& a, NodePath& path, std::map<std::string, std::string>& out) {
    if (l.kind != Tree::Kind::Node) return;
    const NodeVars* nv = a.find(path);
    for (std::size_t i = 0; i < l.kids.size(); ++i) {
        out[l.labels[i]] = nv->incoming[i];
        path.push_back(int(i));
        collect(l.kids[i], a, path, out);
        path.pop_back();
    }
}

}  // namespace

GraftResult graft_tracked(const Tree& q, const std::vector<std::pair<int, Tree>>& inserts) {
    const int n = q.leaves();
    std::map<int, Labelled> at;
    std::map<int, int> which;
    for (std::size_t k = 0; k < inserts.size(); ++k) {
        int i = inserts[k].first;
        if (i < 1 || i > n) fail("IndexOutOfRange", "leaf " + std::to_string(i) + " of a " + std::to_string(n) + "-leaf tree");
        if (at.count(i)) fail("IndexOutOfRange", "leaf " + std::to_string(i) + " grafted twice");
        at[i] = label(inserts[k].second, "i" + std::to_string(k) + ":");
        which[i] = int(k);
    }
    Labelled root;
    if (q.is_leaf()) {
        root = at.count(1) ? at[1] : label(q, "o:");
    } else {
        root = label(q, "o:");
        int leaf = 1;
        substitute(root, at, leaf);
    }
    prune(root);
    GraftResult r;
    r.tree = strip(root);
    EdgeVarAssignment a = assign_vars(r.tree);
    std::map<std::string, std::string> names;
    NodePath p;
    collect(root, a, p, names);
    r.inner_vars.resize(inserts.size());
    for (const auto& [old, now] : names) {
        auto colon = old.find(':');
        std::string tag = old.substr(0, colon), var = old.substr(colon + 1);
        if (tag == "o") r.outer_vars[var] = now;
        else r.inner_vars[std::stoi(tag.substr(1))][var] = now;
    }
    return r;
}

Tree graft(const Tree& q, const std::vector<std::pair<int, Tree>>& inserts) { return graft_tracked(q, inserts).tree; }

std::vector<Tree> enumerate_trees(int max_leaves, int max_height, bool include_empty) {
    // by_height[h]: trees of height <= h with at most max_leaves leaves
    std::vector<Tree> level{Tree::leaf()};
    for (int h = 1; h <= max_height; ++h) {
        std::vector<Tree> next{Tree::leaf()};
        std::vector<Tree> kids;
        std::function<void(int)> rec = [&](int room) {
            if (!kids.empty()) next.push_back(Tree::node(kids));
            for (const auto& c : level) {
                int l = c.leaves();
                if (l > room) continue;
                kids.push_back(c);
                rec(room - l);
                kids.pop_back();
            }
        };
        rec(max_leaves);
        level = std::move(next);
    }
    std::vector<Tree> out = level;
    if (include_empty) out.push_back(Tree::empty());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace vertexkit
