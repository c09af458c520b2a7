#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "hortonlab/pruning.hpp"
#include "hortonlab/samplers.hpp"

using namespace hortonlab;
using testing::nw;

TEST_CASE("series reduction merges a chain into one edge") {
    Tree raw = Tree::empty(true);
    int a = raw.add_node(0, 1.5);
    raw.add_node(a, 2.5);
    int merged = 0;
    Tree r = series_reduce(raw, &merged);
    CHECK(merged == 1);
    CHECK(plane_equal(r, nw("(:4);"), 0.0));

    Tree chain = Tree::empty(true);
    int x = chain.add_node(0, 1.0);
    int y = chain.add_node(x, 1.0);
    chain.add_node(y, 1.0);
    CHECK(plane_equal(series_reduce(chain), nw("(:3);"), 0.0));
}

TEST_CASE("pruning a cherry leaves a single edge") {
    auto r = prune(nw("((:2,:3):1);"));
    CHECK(r.removed_leaf_count == 2);
    CHECK(plane_equal(r.pruned, nw("(:1);"), 0.0));
}

TEST_CASE("pruning merges the stem with the surviving edge") {
    auto r = prune(nw("((:1,(:1,:1):2):3);"));
    CHECK(r.merged_edge_count == 1);
    CHECK(plane_equal(r.pruned, nw("(:5);"), 0.0));
}

TEST_CASE("pruning a single edge gives the empty tree") {
    CHECK(prune(Tree::single_edge(1.0)).pruned.is_empty());
    CHECK(prune(Tree::empty()).pruned.is_empty());
}

TEST_CASE("prune_iter") {
    Tree t = nw("(((,),(,)));");
    CHECK(plane_equal(prune_iter(t, 0), t));
    CHECK(plane_equal(prune_iter(t, 1), nw("((,));")));
    CHECK(plane_equal(prune_iter(t, 2), nw("();")));
    CHECK(prune_iter(t, 3).is_empty());
    CHECK_THROWS(prune_iter(t, -1));
}

TEST_CASE("order by pruning on small trees") {
    CHECK(order_by_pruning(Tree::empty()) == 0);
    CHECK(order_by_pruning(Tree::single_edge()) == 1);
    CHECK(order_by_pruning(nw("((,(,(,))));")) == 2);
    CHECK(order_by_pruning(nw("((,((,(,)),((,(,(,))),(,)))));")) == 3);
}

TEST_CASE("pruning lowers every branch order by one") {
    Rng rng(21);
    for (int i = 0; i < 300; ++i) {
        Tree t = testing::random_tree(rng, 2000);
        auto h = horton_orders(t);
        CHECK(order_by_pruning(t) == h.tree_order);
        auto d = branch_decompose(t, h);
        Tree r = prune(t).pruned;
        auto hr = horton_orders(r);
        CHECK(hr.tree_order == h.tree_order - 1);
        if (r.is_empty()) continue;
        auto dr = branch_decompose(r, hr);
        for (int k = 2; k <= h.tree_order; ++k) {
            CHECK(dr.count(k - 1) == d.count(k));
            for (int j = k + 1; j <= h.tree_order; ++j) CHECK(dr.side_count(k - 1, j - 1) == d.side_count(k, j));
        }
    }
}

TEST_CASE("pruning strictly shortens a tree and preserves validity") {
    Rng rng(22);
    for (int i = 0; i < 300; ++i) {
        Tree t = testing::random_tree(rng, 2000);
        Tree r = prune(t).pruned;
        CHECK(validate(r).valid);
        CHECK(total_length(r) < total_length(t));
    }
}

TEST_CASE("pruning commutes with proper embedding on shapes") {
    Rng rng(23);
    for (int i = 0; i < 300; ++i) {
        Tree t = testing::random_tree(rng, 2000);
        Tree a = shape(prune(proper_embed(t)).pruned);
        Tree b = shape(proper_embed(prune(t).pruned));
        CHECK(plane_equal(a, b));
    }
}

TEST_CASE("pruning preserves total length of surviving edges") {
    Rng rng(24);
    for (int i = 0; i < 200; ++i) {
        Tree t = testing::random_tree(rng, 2000);
        auto r = prune(t);
        double leaves = 0.0;
        for (int v = 1; v < t.size(); ++v)
            if (t.is_leaf(v)) leaves += t.length[v];
        CHECK(std::abs(total_length(r.pruned) - (total_length(t) - leaves)) < 1e-9 * (1.0 + total_length(t)));
    }
}
