#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace vertexkit {

// Rooted planar tree.  Leaves are children of kind Leaf; a Node with no
// children never survives construction (it collapses to the empty tree).
class Tree {
public:
    enum class Kind { Empty, Leaf, Node };

    Tree() = default;  // the empty tree
    static Tree empty() { return Tree(); }
    static Tree leaf();
    static Tree node(std::vector<Tree> children);
    static Tree flat(int n);

    Kind kind() const { return kind_; }
    bool is_empty() const { return kind_ == Kind::Empty; }
    bool is_leaf() const { return kind_ == Kind::Leaf; }
    bool is_node() const { return kind_ == Kind::Node; }
    const std::vector<Tree>& children() const { return children_; }

    int leaves() const;
    int height() const;
    int internal_nodes() const;
    bool is_flat() const;  // a single internal node

    friend bool operator==(const Tree&, const Tree&) = default;
    friend std::strong_ordering operator<=>(const Tree& a, const Tree& b);

private:
    Kind kind_ = Kind::Empty;
    std::vector<Tree> children_;
};

Tree tree_parse(const std::string& text);
std::string tree_format(const Tree& t);

// Path of child positions from the root to an internal node.
using NodePath = std::vector<int>;

struct NodeVars {
    NodePath path;
    std::string letter;
    std::vector<std::string> incoming;  // one per child, in planar order
    std::string outgoing;               // empty at the root
    std::vector<int> leaves;            // 1-based input positions above this node
    int depth = 1;                      // root is 1
};

// Edge variables: the root's incoming edges are x1..xk, later internal nodes
// take y, z, w, ... in breadth-first order.
struct EdgeVarAssignment {
    std::vector<NodeVars> nodes;         // breadth-first, root first
    std::vector<std::string> leaf_vars;  // per input; empty name for the bare leaf tree

    std::vector<std::string> all_vars() const;
    std::vector<std::string> root_vars() const;
    const NodeVars* find(const NodePath& p) const;
    const NodeVars* owner_of(const std::string& var, int* child = nullptr) const;
    int depth_of(const std::string& var) const;  // depth of the node the edge enters
};

EdgeVarAssignment assign_vars(const Tree& t);

struct AllowedPair {
    std::string a, b;
    std::vector<int> scope;  // 1-based inputs the singularity may depend on
    NodePath node;
};
std::vector<AllowedPair> allowed_singularities(const Tree& t, const EdgeVarAssignment& a);

// Total orders of the internal vertices of the augmented tree, each as a list
// of node letters starting with "bot".  Sorted by formatted string.
std::vector<std::vector<std::string>> linear_extensions(const Tree& t);
std::string format_extension(const std::vector<std::string>& order);

// Leaf intervals [first, last] (1-based) of every internal node.
std::set<std::pair<int, int>> clusters(const Tree& t);
bool is_refinement(const Tree& p, const Tree& q);

// inserts: 1-based leaf index of q -> tree glued at that leaf.
Tree graft(const Tree& q, const std::vector<std::pair<int, Tree>>& inserts);

// Grafting with variable bookkeeping.  Each map sends an old edge variable to
// its name in the result; edges that disappear are absent.
struct GraftResult {
    Tree tree;
    std::map<std::string, std::string> outer_vars;
    std::vector<std::map<std::string, std::string>> inner_vars;  // per insert
};
GraftResult graft_tracked(const Tree& q, const std::vector<std::pair<int, Tree>>& inserts);

// All trees with 0 < leaves <= max_leaves (plus the empty tree when
// include_empty) and height <= max_height, unary nodes included.  Sorted by
// formatted string.
std::vector<Tree> enumerate_trees(int max_leaves, int max_height, bool include_empty = true);

}  // namespace vertexkit
