#include "hortonlab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace hortonlab {

Tree Tree::empty(bool with_lengths) {
    Tree t;
    t.parent = {kNone};
    t.child = {{kNone, kNone}};
    if (with_lengths) t.length = {0.0};
    return t;
}

Tree Tree::single_edge(std::optional<double> len) {
    Tree t = empty(len.has_value());
    t.add_node(0, len.value_or(0.0));
    return t;
}

NodeKind Tree::kind(int v) const {
    if (v == 0) return NodeKind::root;
    return child_count(v) == 0 ? NodeKind::leaf : NodeKind::internal;
}

int Tree::leaf_count() const {
    int n = 0;
    for (int v = 1; v < size(); ++v) n += is_leaf(v);
    return n;
}

int Tree::add_node(int par, double len) {
    const int v = size();
    const bool lengths = has_lengths();
    parent.push_back(par);
    child.push_back({kNone, kNone});
    if (lengths) length.push_back(len);
    auto& slots = child[par];
    if (slots[0] == kNone)
        slots[0] = v;
    else if (slots[1] == kNone)
        slots[1] = v;
    else
        throw std::logic_error("add_node: parent already has two children");
    return v;
}

double Tree::edge_length(int v) const {
    double l = length[v];
    if (root_stem_length && parent[v] == 0) l += *root_stem_length;
    return l;
}

ValidationReport validate(const Tree& t) {
    ValidationReport r;
    auto bad = [&](std::string msg) {
        r.valid = false;
        r.violations.push_back(std::move(msg));
    };
    const int n = t.size();
    if (n == 0) {
        bad("no root");
        return r;
    }
    if (static_cast<int>(t.child.size()) != n) {
        bad("child table size mismatch");
        return r;
    }
    if (t.has_lengths() && static_cast<int>(t.length.size()) != n) {
        bad("length table size mismatch");
        return r;
    }
    if (t.parent[0] != kNone) bad("node 0 is not a root");
    for (int v = 1; v < n; ++v) {
        const int p = t.parent[v];
        if (p == kNone) {
            bad("more than one root: node " + std::to_string(v));
            continue;
        }
        if (p < 0 || p >= n || (t.child[p][0] != v && t.child[p][1] != v))
            bad("parent link broken at node " + std::to_string(v));
    }
    for (int v = 0; v < n; ++v) {
        const auto& c = t.child[v];
        if (c[0] == kNone && c[1] != kNone) bad("child slots out of order at node " + std::to_string(v));
        for (int s : c) {
            if (s == kNone) continue;
            if (s <= 0 || s >= n || t.parent[s] != v) bad("child link broken at node " + std::to_string(v));
        }
    }
    if (!r.valid) return r;

    // reachability and cycles
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    int reached = 0;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (seen[v]) {
            bad("cycle through node " + std::to_string(v));
            return r;
        }
        seen[v] = 1;
        ++reached;
        for (int s : t.child[v])
            if (s != kNone) stack.push_back(s);
    }
    if (reached != n) bad("unreachable nodes");

    if (n > 1 && t.child_count(0) != 1) bad("root is not planted");
    for (int v = 1; v < n; ++v)
        if (t.child_count(v) == 1) bad("not reduced: node " + std::to_string(v) + " has one child");

    if (t.root_stem_length && !(*t.root_stem_length >= 0.0 && std::isfinite(*t.root_stem_length)))
        bad("negative root stem length");
    if (t.has_lengths()) {
        for (int v = 1; v < n; ++v) {
            const double l = t.length[v];
            const bool artificial_stem = t.root_stem_length && t.parent[v] == 0;
            const bool ok = std::isfinite(l) && (artificial_stem ? l >= 0.0 : l > 0.0);
            if (!ok) bad("non-positive edge length at node " + std::to_string(v));
        }
    }
    return r;
}

std::vector<int> preorder(const Tree& t) {
    std::vector<int> out;
    out.reserve(t.size());
    std::vector<int> stack{0};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        out.push_back(v);
        if (t.child[v][1] != kNone) stack.push_back(t.child[v][1]);
        if (t.child[v][0] != kNone) stack.push_back(t.child[v][0]);
    }
    return out;
}

HortonOrderAssignment horton_orders(const Tree& t) {
    HortonOrderAssignment h;
    const int n = t.size();
    h.order.assign(n, 0);
    if (n <= 1) return h;
    if (t.child_count(0) != 1) throw std::invalid_argument("horton_orders: root is not planted");
    const auto pre = preorder(t);
    if (static_cast<int>(pre.size()) != n) throw std::invalid_argument("horton_orders: malformed tree");
    for (auto it = pre.rbegin(); it != pre.rend(); ++it) {
        const int v = *it;
        if (v == 0) continue;
        const auto& c = t.child[v];
        const int k = t.child_count(v);
        if (k == 0) {
            h.order[v] = 1;
        } else if (k == 2) {
            const int a = h.order[c[0]], b = h.order[c[1]];
            h.order[v] = a == b ? a + 1 : std::max(a, b);
        } else {
            throw std::invalid_argument("horton_orders: not reduced");
        }
    }
    h.tree_order = h.order[t.stem()];
    h.order[0] = h.tree_order;
    return h;
}

std::int64_t BranchDecomposition::count(int k) const {
    return k >= 1 && k < static_cast<int>(n.size()) ? n[k] : 0;
}

std::int64_t BranchDecomposition::side_count(int i, int j) const {
    if (i < 1 || j <= i || j >= static_cast<int>(nij.size())) return 0;
    return nij[i][j];
}

std::vector<double> BranchDecomposition::branch_lengths(const Tree& t, int b) const {
    if (!t.has_lengths()) throw std::invalid_argument("branch_lengths: tree has no lengths");
    std::vector<double> out;
    for (int v : branch_edges(b)) out.push_back(t.length[v]);
    return out;
}

BranchDecomposition branch_decompose(const Tree& t, const HortonOrderAssignment& h) {
    const int n = t.size();
    if (static_cast<int>(h.order.size()) != n) throw std::invalid_argument("branch_decompose: order table size mismatch");
    BranchDecomposition d;
    d.branch_of.assign(n, kNone);
    d.position_of.assign(n, 0);
    d.max_order = h.tree_order;
    d.n.assign(h.tree_order + 1, 0);
    d.nij.assign(h.tree_order + 1, std::vector<std::int64_t>(h.tree_order + 1, 0));
    if (n <= 1) return d;

    for (int v = 1; v < n; ++v) {
        const auto& c = t.child[v];
        const int k = t.child_count(v);
        int expect = 1;
        if (k == 2) {
            const int a = h.order[c[0]], b = h.order[c[1]];
            expect = a == b ? a + 1 : std::max(a, b);
        } else if (k == 1) {
            throw std::invalid_argument("branch_decompose: not reduced");
        }
        if (h.order[v] != expect) throw std::invalid_argument("branch_decompose: order assignment does not match tree");
    }

    struct PendingSide {
        int host;
        SideBranch rec;
    };
    std::vector<PendingSide> pending;
    auto open_branch = [&](int v, int parent_branch, bool side) {
        Branch b;
        b.order = h.order[v];
        b.initial_vertex = t.parent[v];
        b.parent_branch = parent_branch;
        b.is_side = side;
        d.branches.push_back(b);
        const int id = static_cast<int>(d.branches.size()) - 1;
        d.branch_of[v] = id;
        d.position_of[v] = 1;
        d.n[b.order] += 1;
        return id;
    };

    open_branch(t.stem(), kNone, false);
    std::vector<int> stack{t.stem()};
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        d.branches[d.branch_of[u]].edge_count += 1;
        if (t.child_count(u) == 0) continue;
        const int a = t.child[u][0], b = t.child[u][1];
        const int oa = h.order[a], ob = h.order[b];
        if (oa == ob) {
            open_branch(a, d.branch_of[u], false);
            open_branch(b, d.branch_of[u], false);
        } else {
            const int big = oa > ob ? a : b;
            const int small = oa > ob ? b : a;
            d.branch_of[big] = d.branch_of[u];
            d.position_of[big] = d.position_of[u] + 1;
            const int id = open_branch(small, d.branch_of[u], true);
            pending.push_back({d.branch_of[u], SideBranch{h.order[small], d.position_of[u], id}});
            d.nij[h.order[small]][h.order[u]] += 1;
        }
        stack.push_back(b);
        stack.push_back(a);
    }

    // lay out edges and side records contiguously per branch
    int off = 0;
    for (auto& b : d.branches) {
        b.edge_begin = off;
        off += b.edge_count;
    }
    d.edges.assign(off, kNone);
    for (int v = 1; v < n; ++v) {
        const auto& b = d.branches[d.branch_of[v]];
        d.edges[b.edge_begin + d.position_of[v] - 1] = v;
    }
    std::vector<int> side_counts(d.branches.size(), 0);
    for (const auto& p : pending) side_counts[p.host] += 1;
    off = 0;
    for (std::size_t b = 0; b < d.branches.size(); ++b) {
        d.branches[b].side_begin = off;
        d.branches[b].side_count = 0;
        off += side_counts[b];
    }
    d.side_branches.resize(off);
    for (const auto& p : pending) {  // pending is already top-down within each host
        auto& host = d.branches[p.host];
        d.side_branches[host.side_begin + host.side_count++] = p.rec;
    }
    return d;
}

namespace {

class ShapeTable {
public:
    static constexpr int kPhi = 0;
    static constexpr int kEdge = 1;
    int join(int l, int r) {
        const std::uint64_t key = (static_cast<std::uint64_t>(l) << 32) | static_cast<std::uint32_t>(r);
        auto [it, inserted] = ids_.try_emplace(key, next_);
        if (inserted) ++next_;
        return it->second;
    }

private:
    std::unordered_map<std::uint64_t, int> ids_;
    int next_ = 2;
};

// Counts of order-1 side branches per edge of d0 = R^{k+1}(subtree at a),
// listed in preorder of d0, read off the embedded subtree rooted at a.
std::vector<int> side_sequence(const Tree& t, const std::vector<int>& order, int a, int k) {
    std::vector<int> seq{0};
    std::vector<std::pair<int, int>> stack{{a, 0}};
    const int floor = k + 2;
    while (!stack.empty()) {
        auto [x, cnt] = stack.back();
        stack.pop_back();
        const auto& c = t.child[x];
        if (c[0] == kNone) {  // cannot happen for order >= k+2, kept for safety
            seq.push_back(cnt);
            continue;
        }
        const bool big0 = order[c[0]] >= floor, big1 = order[c[1]] >= floor;
        if (big0 != big1) {
            const int cont = big0 ? c[0] : c[1];
            const int side = big0 ? c[1] : c[0];
            stack.push_back({cont, cnt + (order[side] == k + 1 ? 1 : 0)});
        } else {
            seq.push_back(cnt);
            if (big0) {
                stack.push_back({c[1], 0});
                stack.push_back({c[0], 0});
            }
        }
    }
    return seq;
}

// -1 if subtree a precedes b (a is smaller), 1 if larger, 0 if equal.
int compare_length_vectors(const Tree& t, int a, int b) {
    std::vector<std::pair<int, int>> stack{{a, b}};
    while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        if (t.length[x] != t.length[y]) return t.length[x] < t.length[y] ? -1 : 1;
        if (t.child[x][0] != kNone) {
            stack.push_back({t.child[x][1], t.child[y][1]});
            stack.push_back({t.child[x][0], t.child[y][0]});
        }
    }
    return 0;
}

}  // namespace

Tree proper_embed(const Tree& in) {
    Tree t = in;
    t.embedded = true;
    if (t.is_empty()) return t;
    const auto h = horton_orders(t);
    const auto& order = h.order;
    const int n = t.size();
    const auto pre = preorder(t);

    // pid[off[v] + k] = shape id of R^k(subtree at v), for k < order[v]
    std::vector<int> off(n + 1, 0);
    for (int v = 0; v < n; ++v) off[v + 1] = off[v] + (v == 0 ? 0 : order[v]);
    std::vector<int> pid(off[n], ShapeTable::kPhi);
    ShapeTable table;
    auto level = [&](int v, int k) { return k < order[v] ? pid[off[v] + k] : ShapeTable::kPhi; };

    for (auto it = pre.rbegin(); it != pre.rend(); ++it) {
        const int v = *it;
        if (v == 0) continue;
        auto& c = t.child[v];
        if (c[0] == kNone) {
            pid[off[v]] = ShapeTable::kEdge;
            continue;
        }
        const int oa = order[c[0]], ob = order[c[1]];
        bool swap = false;
        if (oa != ob) {
            swap = oa < ob;  // the lower-order side branch goes right
        } else {
            const int a = c[0], b = c[1];
            int kstar = -1;
            for (int k = oa - 2; k >= 0; --k)
                if (level(a, k) != level(b, k)) {
                    kstar = k;
                    break;
                }
            if (kstar >= 0) {
                const auto sa = side_sequence(t, order, a, kstar);
                const auto sb = side_sequence(t, order, b, kstar);
                // smaller first differing count goes right
                swap = std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(), sb.end());
            } else if (t.has_lengths()) {
                if (t.length[a] != t.length[b])
                    swap = t.length[a] < t.length[b];  // shorter root edge goes right
                else
                    swap = compare_length_vectors(t, a, b) < 0;
            }
        }
        if (swap) std::swap(c[0], c[1]);
        for (int k = 0; k < order[v]; ++k) {
            const bool in0 = order[c[0]] > k, in1 = order[c[1]] > k;
            int id;
            if (in0 && in1)
                id = table.join(level(c[0], k), level(c[1], k));
            else if (in0)
                id = level(c[0], k);
            else if (in1)
                id = level(c[1], k);
            else
                id = ShapeTable::kEdge;
            pid[off[v] + k] = id;
        }
    }
    return t;
}

std::vector<int> dfs_labels(const Tree& t) {
    if (!t.embedded) throw std::invalid_argument("dfs_labels: tree has no embedding");
    std::vector<int> label(t.size(), 0);
    int next = 1;
    for (int v : preorder(t)) label[v] = next++;
    return label;
}

Tree shape(const Tree& in) {
    Tree t;
    t.parent = in.parent;
    t.child = in.child;
    return t;
}

double total_length(const Tree& t) {
    if (t.is_empty()) return 0.0;
    if (!t.has_lengths()) throw std::invalid_argument("total_length: tree has no lengths");
    double s = t.root_stem_length.value_or(0.0);
    for (int v = 1; v < t.size(); ++v) s += t.length[v];
    return s;
}

Tree subtree(const Tree& t, int v) {
    if (v <= 0 || v >= t.size()) throw std::invalid_argument("subtree: bad vertex");
    Tree s = Tree::empty(t.has_lengths());
    s.embedded = t.embedded;
    std::vector<std::pair<int, int>> stack{{v, 0}};
    while (!stack.empty()) {
        auto [x, par] = stack.back();
        stack.pop_back();
        const int y = s.add_node(par, t.has_lengths() ? t.length[x] : 0.0);
        if (t.child[x][1] != kNone) stack.push_back({t.child[x][1], y});
        if (t.child[x][0] != kNone) stack.push_back({t.child[x][0], y});
    }
    return s;
}

bool plane_equal(const Tree& a, const Tree& b, double tol, bool compare_lengths) {
    if (a.size() != b.size()) return false;
    compare_lengths = compare_lengths && a.has_lengths() && b.has_lengths();
    if (compare_lengths) {
        const double ra = a.root_stem_length.value_or(0.0), rb = b.root_stem_length.value_or(0.0);
        if (std::abs(ra - rb) > tol) return false;
    }
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        if (a.child_count(x) != b.child_count(y)) return false;
        if (compare_lengths && x != 0 && std::abs(a.length[x] - b.length[y]) > tol) return false;
        for (int s = 0; s < 2; ++s)
            if (a.child[x][s] != kNone) stack.push_back({a.child[x][s], b.child[y][s]});
    }
    return true;
}

std::string canonical_shape(const Tree& in) {
    if (in.is_empty()) return "";
    const Tree t = proper_embed(shape(in));
    std::string out;
    // iterative DFS emitting "(" on entry and ")" on exit
    std::vector<std::pair<int, bool>> stack{{t.stem(), false}};
    while (!stack.empty()) {
        auto [v, done] = stack.back();
        stack.pop_back();
        if (done) {
            out.push_back(')');
            continue;
        }
        out.push_back('(');
        stack.push_back({v, true});
        if (t.child[v][1] != kNone) stack.push_back({t.child[v][1], false});
        if (t.child[v][0] != kNone) stack.push_back({t.child[v][0], false});
    }
    return out;
}

}  // namespace hortonlab
