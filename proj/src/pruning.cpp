#include "hortonlab/pruning.hpp"

#include <stdexcept>

namespace hortonlab {

namespace {

template <class Alive>
Tree contract(const Tree& t, Alive alive, int& merged) {
    Tree out = Tree::empty(t.has_lengths());
    out.embedded = t.embedded;
    const bool lengths = t.has_lengths();
    auto alive_children = [&](int x, int (&buf)[2]) {
        int k = 0;
        for (int s : t.child[x])
            if (s != kNone && alive(s)) buf[k++] = s;
        return k;
    };
    struct Item {
        int x, parent;
    };
    std::vector<Item> stack;
    int top[2];
    const int roots = alive_children(0, top);
    for (int i = roots - 1; i >= 0; --i) stack.push_back({top[i], 0});
    if (roots > 0) out.root_stem_length = t.root_stem_length;
    while (!stack.empty()) {
        auto [x, par] = stack.back();
        stack.pop_back();
        double acc = 0.0;
        int buf[2];
        int k = alive_children(x, buf);
        while (k == 1) {
            if (lengths) acc += t.length[x];
            ++merged;
            x = buf[0];
            k = alive_children(x, buf);
        }
        const int y = out.add_node(par, lengths ? acc + t.length[x] : 0.0);
        for (int i = k - 1; i >= 0; --i) stack.push_back({buf[i], y});
    }
    return out;
}

}  // namespace

Tree series_reduce(const Tree& raw, int* merged) {
    int m = 0;
    Tree out = contract(raw, [](int) { return true; }, m);
    if (merged) *merged = m;
    return out;
}

PruneResult prune(const Tree& t) {
    PruneResult r;
    if (t.is_empty()) {
        r.pruned = t;
        return r;
    }
    r.removed_leaf_count = t.leaf_count();
    r.pruned = contract(t, [&t](int x) { return t.child_count(x) > 0; }, r.merged_edge_count);
    return r;
}

Tree prune_iter(const Tree& t, int m) {
    if (m < 0) throw std::invalid_argument("prune_iter: negative iteration count");
    Tree cur = t;
    for (int i = 0; i < m && !cur.is_empty(); ++i) cur = prune(cur).pruned;
    return cur;
}

int order_by_pruning(const Tree& t) {
    int k = 0;
    Tree cur = t;
    while (!cur.is_empty()) {
        cur = prune(cur).pruned;
        ++k;
    }
    return k;
}

}  // namespace hortonlab
