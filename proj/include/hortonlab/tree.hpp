#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hortonlab {

inline constexpr int kNone = -1;

enum class NodeKind { root, internal, leaf };

// Rooted planted binary tree stored as index-based adjacency. Node 0 is the
// root. Child slot 0 is filled before slot 1; when `embedded` is set slot 0
// is the left child.
//
// Edge lengths live on the lower endpoint: length[v] is the parental edge of
// v. When root_stem_length is set the stem edge (root -> its child) carries
// an extra artificial length that is kept out of length[].
struct Tree {
    std::vector<int> parent;
    std::vector<std::array<int, 2>> child;
    std::vector<double> length;
    bool embedded = false;
    std::optional<double> root_stem_length;

    static Tree empty(bool with_lengths = false);
    static Tree single_edge(std::optional<double> len = std::nullopt);

    int size() const { return static_cast<int>(parent.size()); }
    bool is_empty() const { return size() <= 1; }
    bool has_lengths() const { return !length.empty(); }
    int stem() const { return child.empty() ? kNone : child[0][0]; }
    int child_count(int v) const { return (child[v][0] != kNone) + (child[v][1] != kNone); }
    bool is_leaf(int v) const { return v != 0 && child[v][0] == kNone && child[v][1] == kNone; }
    NodeKind kind(int v) const;
    int leaf_count() const;

    // Appends a node under `par`; `len` is stored only when the tree has lengths.
    int add_node(int par, double len = 0.0);
    // Full length of the parental edge of v, including the artificial stem part.
    double edge_length(int v) const;
};

struct ValidationReport {
    bool valid = true;
    std::vector<std::string> violations;
};

ValidationReport validate(const Tree& tree);

// Preorder (root first, left before right) and its reverse, iteratively.
std::vector<int> preorder(const Tree& tree);

struct HortonOrderAssignment {
    std::vector<int> order;  // per node; the root carries the tree order
    int tree_order = 0;
};

HortonOrderAssignment horton_orders(const Tree& tree);

struct SideBranch {
    int order = 0;
    int position = 0;  // attaches below the position-th edge of the host branch (1-based)
    int branch = kNone;
};

struct Branch {
    int order = 0;
    int initial_vertex = kNone;  // upper endpoint of the first edge
    int parent_branch = kNone;
    bool is_side = false;
    int edge_begin = 0, edge_count = 0;
    int side_begin = 0, side_count = 0;
};

struct BranchDecomposition {
    std::vector<Branch> branches;
    std::vector<int> edges;  // lower endpoints, grouped per branch, top-down
    std::vector<SideBranch> side_branches;
    std::vector<int> branch_of;     // per node, kNone for the root
    std::vector<int> position_of;   // per node, 1-based edge index within its branch
    int max_order = 0;

    std::span<const int> branch_edges(int b) const {
        return {edges.data() + branches[b].edge_begin, static_cast<std::size_t>(branches[b].edge_count)};
    }
    std::span<const SideBranch> branch_sides(int b) const {
        return {side_branches.data() + branches[b].side_begin,
                static_cast<std::size_t>(branches[b].side_count)};
    }
    // N_k: number of branches of order k.
    std::int64_t count(int k) const;
    // N_{i,j}: side branches of order i merging into branches of order j.
    std::int64_t side_count(int i, int j) const;
    std::vector<double> branch_lengths(const Tree& tree, int b) const;

    std::vector<std::int64_t> n;                // n[k]
    std::vector<std::vector<std::int64_t>> nij;  // nij[i][j]
};

BranchDecomposition branch_decompose(const Tree& tree, const HortonOrderAssignment& orders);

Tree proper_embed(const Tree& tree);

std::vector<int> dfs_labels(const Tree& tree);

Tree shape(const Tree& tree);

double total_length(const Tree& tree);

// Planted complete subtree hanging from the parental edge of v.
Tree subtree(const Tree& tree, int v);

// Ordered comparison of two trees; lengths are compared when both carry them.
bool plane_equal(const Tree& a, const Tree& b, double tol = 0.0, bool compare_lengths = true);

// Parenthesised DFS string of the properly embedded shape; "" for the empty tree.
std::string canonical_shape(const Tree& tree);

}  // namespace hortonlab
