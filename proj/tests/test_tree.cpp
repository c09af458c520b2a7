#include <doctest.h>

#include "helpers.hpp"
#include "hortonlab/pruning.hpp"
#include "hortonlab/tree.hpp"

using namespace hortonlab;
using testing::nw;

TEST_CASE("validate accepts the empty tree and a single edge") {
    CHECK(validate(Tree::empty()).valid);
    CHECK(validate(Tree::single_edge(1.0)).valid);
}

TEST_CASE("validate rejects a vertex with one child") {
    Tree t = Tree::empty();
    int a = t.add_node(0);
    int b = t.add_node(a);
    t.add_node(b);
    auto r = validate(t);
    CHECK_FALSE(r.valid);
    REQUIRE(!r.violations.empty());
    CHECK(r.violations[0].find("not reduced") != std::string::npos);
}

TEST_CASE("validate rejects negative lengths") {
    Tree t = Tree::single_edge(-1.0);
    CHECK_FALSE(validate(t).valid);
}

TEST_CASE("orders of small trees") {
    CHECK(horton_orders(Tree::empty()).tree_order == 0);
    CHECK(horton_orders(Tree::single_edge()).tree_order == 1);
    CHECK(horton_orders(nw("((,));")).tree_order == 2);
    CHECK(horton_orders(nw("((:1,((:1,:1):1,(:1,:1):1):1):1);")).tree_order == 3);
}

TEST_CASE("branch counts of a ten-leaf order-3 tree") {
    Tree t = nw("((,((,(,)),((,(,(,))),(,)))));");
    CHECK(validate(t).valid);
    auto h = horton_orders(t);
    REQUIRE(h.tree_order == 3);
    auto d = branch_decompose(t, h);
    CHECK(d.count(1) == 10);
    CHECK(d.count(2) == 3);
    CHECK(d.count(3) == 1);
    CHECK(d.side_count(1, 2) == 3);
    CHECK(d.side_count(1, 3) == 1);
    CHECK(d.side_count(2, 3) == 1);
}

TEST_CASE("perfect tree has no side branches") {
    auto d = branch_decompose(nw("(((,),(,)));"), horton_orders(nw("(((,),(,)));")));
    CHECK(d.count(1) == 4);
    CHECK(d.count(2) == 2);
    CHECK(d.count(3) == 1);
    CHECK(d.side_count(1, 2) == 0);
    CHECK(d.side_count(1, 3) == 0);
    CHECK(d.side_count(2, 3) == 0);
}

TEST_CASE("branch edges and side positions") {
    Tree t = nw("((,(,(,))));");
    auto h = horton_orders(t);
    auto d = branch_decompose(t, h);
    REQUIRE(d.max_order == 2);
    int top = d.branch_of[t.stem()];
    CHECK(d.branches[top].order == 2);
    CHECK(d.branch_edges(top).size() == 3);
    auto sides = d.branch_sides(top);
    REQUIRE(sides.size() == 2);
    CHECK(sides[0].position == 1);
    CHECK(sides[1].position == 2);
    CHECK(sides[0].order == 1);
}

TEST_CASE("proper embedding puts the higher order subtree on the left") {
    Tree e = proper_embed(nw("((,(,(,))));"));
    CHECK(plane_equal(e, nw("((((,),),));")));
}

TEST_CASE("proper embedding breaks ties by length") {
    Tree e = proper_embed(nw("(((:1,:1):1,(:1,:1):2):1);"));
    CHECK(plane_equal(e, nw("(((:1,:1):2,(:1,:1):1):1);")));
}

TEST_CASE("proper embedding is idempotent and ignores the input embedding") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        Tree t = testing::random_tree(rng, 300);
        Tree e = proper_embed(t);
        CHECK(plane_equal(proper_embed(e), e));
        Tree flipped = t;
        for (int v = 0; v < flipped.size(); ++v)
            if (flipped.child_count(v) == 2) std::swap(flipped.child[v][0], flipped.child[v][1]);
        CHECK(plane_equal(proper_embed(flipped), e));
    }
}

TEST_CASE("dfs labels follow preorder") {
    auto l = dfs_labels(nw("(:1);"));
    CHECK(l == std::vector<int>{1, 2});
    Tree c = nw("((,));");
    auto lc = dfs_labels(c);
    REQUIRE(lc.size() == 4);
    CHECK(lc[0] == 1);
    CHECK(lc[c.stem()] == 2);
    CHECK(lc[c.child[c.stem()][0]] == 3);
    CHECK(lc[c.child[c.stem()][1]] == 4);
    CHECK_THROWS(dfs_labels(tree_from_newick("((,));", false)));
}

TEST_CASE("shape drops lengths and is idempotent") {
    Tree t = nw("((:1,:2):3);");
    Tree s = shape(t);
    CHECK_FALSE(s.has_lengths());
    CHECK(plane_equal(shape(s), s));
    CHECK(plane_equal(s, nw("((,));")));
}

TEST_CASE("total length") {
    CHECK(total_length(Tree::empty(true)) == 0.0);
    CHECK(total_length(nw("((:1,:2):3);")) == 6.0);
    CHECK(total_length(nw("((:1,:2):3):0.5;")) == 6.5);
}

TEST_CASE("subtree of a vertex") {
    Tree t = nw("((:1,(:2,:3):4):5);");
    int v = t.child[t.stem()][1];
    CHECK(plane_equal(subtree(t, v), nw("((:2,:3):4);"), 0.0));
}

TEST_CASE("canonical shape ignores embedding and lengths") {
    CHECK(canonical_shape(nw("((,(,)));")) == canonical_shape(nw("(((,),):7);")));
    CHECK(canonical_shape(Tree::empty()).empty());
    CHECK(canonical_shape(nw("((,(,)));")) != canonical_shape(nw("(((,),(,)));")));
}

TEST_CASE("node count identities of reduced planted trees") {
    Rng rng(5);
    for (int i = 0; i < 300; ++i) {
        Tree t = testing::random_tree(rng, 500);
        const int leaves = t.leaf_count();
        int internal = 0;
        for (int v = 1; v < t.size(); ++v) internal += t.child_count(v) == 2;
        CHECK(internal == leaves - 1);
        CHECK(t.size() == 2 * leaves);
        CHECK(validate(t).valid);
    }
}

TEST_CASE("branch counts satisfy N_k = N_{k+1} paths and Tokunaga totals") {
    Rng rng(8);
    for (int i = 0; i < 300; ++i) {
        Tree t = testing::random_tree(rng, 1000);
        auto h = horton_orders(t);
        auto d = branch_decompose(t, h);
        // every branch except the top one is either a side branch or one of two merging
        for (int k = 1; k < h.tree_order; ++k) {
            std::int64_t sides = 0;
            for (int j = k + 1; j <= h.tree_order; ++j) sides += d.side_count(k, j);
            CHECK(d.count(k) == 2 * d.count(k + 1) + sides);
        }
        CHECK(d.count(h.tree_order) == 1);
        CHECK(static_cast<int>(d.edges.size()) == t.size() - 1);
    }
}
