#include <doctest.h>

#include <cmath>
#include <complex>

#include "helpers.hpp"
#include "hortonlab/pruning.hpp"
#include "hortonlab/transforms.hpp"

using namespace hortonlab;
using testing::nw;

namespace {

Excursion exc(std::vector<double> values) {
    Excursion e;
    for (std::size_t i = 0; i < values.size(); ++i) e.times.push_back(static_cast<double>(i));
    e.values = std::move(values);
    return e;
}

}  // namespace

TEST_CASE("harris path of a single edge") {
    auto e = harris_path(nw("(:1);"));
    CHECK(e.times == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(e.values == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("harris path of a cherry") {
    auto e = harris_path(nw("((:2,:3):1);"));
    CHECK(e.values == std::vector<double>{0.0, 3.0, 1.0, 4.0, 0.0});
    CHECK(e.times.back() == 12.0);
    CHECK(e.times.size() == 5);
}

TEST_CASE("harris path preconditions") {
    CHECK_THROWS(harris_path(Tree::empty(true)));
    CHECK_THROWS(harris_path(nw("((,));")));
    CHECK_THROWS(harris_path(tree_from_newick("((:1,:1):1);", false)));
}

TEST_CASE("harris path ends at twice the total length") {
    Rng rng(51);
    for (int i = 0; i < 100; ++i) {
        Tree t = testing::random_tree(rng, 500);
        auto e = harris_path(t);
        CHECK(std::abs(e.times.back() - 2.0 * total_length(t)) <= 1e-9 * total_length(t));
        CHECK(e.times.size() == static_cast<std::size_t>(2 * t.leaf_count() + 1));
    }
}

TEST_CASE("level set tree of the five-point excursion") {
    auto r = level_set_tree(exc({0, 3, 1, 2, 0}));
    CHECK_FALSE(r.ties);
    CHECK(plane_equal(r.tree, nw("((:2,:1):1);"), 1e-15));
}

TEST_CASE("single peak gives a single edge") {
    auto r = level_set_tree(exc({0, 2.5, 0}));
    CHECK(plane_equal(r.tree, nw("(:2.5);"), 0.0));
}

TEST_CASE("level set tree ignores breakpoint times") {
    Excursion a = exc({0, 3, 1, 2, 0});
    Excursion b = a;
    b.times = {0.0, 0.1, 5.0, 5.5, 100.0};
    CHECK(plane_equal(level_set_tree(a).tree, level_set_tree(b).tree, 0.0));
}

TEST_CASE("level set tree rejects non-excursions") {
    CHECK_THROWS(level_set_tree(exc({0, -1, 2, 0})));
    CHECK_THROWS(level_set_tree(exc({1, 2, 0})));
    Excursion bad{{0.0, 0.0, 1.0}, {0.0, 1.0, 0.0}};
    CHECK_THROWS(level_set_tree(bad));
}

TEST_CASE("ties are flagged") {
    CHECK(level_set_tree(exc({0, 2, 1, 2, 1, 2, 0})).ties);
    CHECK(level_set_tree(exc({0, 2, 2, 0})).ties);
}

TEST_CASE("meander with an interior global minimum gets an artificial root") {
    auto r = level_set_tree(TimeSeries{{2.0, 0.0, 3.0}}, 0.75);
    REQUIRE(r.tree.root_stem_length);
    CHECK(*r.tree.root_stem_length == 0.75);
    CHECK(r.tree.length[r.tree.stem()] == 0.0);
    CHECK(r.tree.leaf_count() == 2);
    auto b = level_set_tree(TimeSeries{{0.0, 3.0, 1.0, 2.0}});
    CHECK_FALSE(b.tree.root_stem_length);
    CHECK(plane_equal(b.tree, nw("((:2,:1):1);"), 1e-15));
}

TEST_CASE("reciprocity of harris path and level set tree") {
    Rng rng(52);
    for (int i = 0; i < 200; ++i) {
        Tree t = testing::random_tree(rng, 800);
        CHECK(plane_equal(level_set_tree(harris_path(t)).tree, t, 1e-12));
    }
    Excursion y = canonical_excursion(exc({0, 3, 1, 2.5, 0.5, 4, 0}));
    auto back = harris_path(level_set_tree(y).tree);
    CHECK(back.values == y.values);
    for (std::size_t k = 0; k < y.times.size(); ++k) CHECK(std::abs(back.times[k] - y.times[k]) < 1e-12);
}

TEST_CASE("local minima series") {
    auto m = local_minima_series(exc({0, 3, 1, 2, 0}));
    CHECK(m.values == std::vector<double>{0, 1, 0});
    CHECK(m.times == std::vector<double>{0, 2, 4});
    auto mono = local_minima_series(TimeSeries{{0, 1, 2, 3}});
    CHECK(mono.values == std::vector<double>{0, 3});
}

TEST_CASE("local minima commute with pruning") {
    Rng rng(53);
    for (int i = 0; i < 200; ++i) {
        auto x = sample_walk_excursion({0.5, 1.0, 1.0}, rng, 5000);
        if (!x) continue;
        Tree base = level_set_tree(*x).tree;
        Excursion y = *x;
        for (int m = 1; m <= 3; ++m) {
            y = local_minima_series(y);
            CHECK(plane_equal(level_set_tree(y).tree, prune_iter(base, m), 1e-12));
        }
    }
}

TEST_CASE("excursion extraction") {
    auto e = extract_excursions(TimeSeries{{0.5, 2.0, 0.3}});
    REQUIRE(e.size() == 1);
    CHECK(e[0].times.back() == doctest::Approx(1.0 + 1.5 / 1.7).epsilon(1e-15));
    CHECK(e[0].values == std::vector<double>{0.0, 1.5, 0.0});
    CHECK(extract_excursions(TimeSeries{{3, 2, 1, 0}}).empty());
    auto two = extract_excursions(TimeSeries{{0, 1, 0, 1, 0}});
    REQUIRE(two.size() == 2);
    CHECK(two[0].values == std::vector<double>{0, 1, 0});
    CHECK(two[1].times.front() == 2.0);
}

TEST_CASE("minima kernel") {
    auto k = minima_kernel({0.5, 4.0, 4.0});
    CHECK(k.rho == 0.5);
    CHECK(k.lambda_up == 2.0);
    CHECK(k.lambda_down == 2.0);
    auto z = minima_kernel({0.25, 1.0, 3.0});  // zero-mean increments
    CHECK(z.rho == 0.5);
    CHECK(z.lambda_up == z.lambda_down);
    CHECK_THROWS(minima_kernel({0.0, 1.0, 1.0}));
    CHECK_THROWS(minima_kernel({1.0, 1.0, 1.0}));
}

TEST_CASE("characteristic function identity") {
    auto r = verify_char_identity(1.0, {0.0, 0.5, 1.0, 2.0, 5.0});
    for (double x : r) CHECK(std::abs(x) < 1e-12);
    auto uniform = [](double s) {
        if (s == 0.0) return std::complex<double>(1.0);
        return (std::exp(std::complex<double>(0.0, s)) - 1.0) / std::complex<double>(0.0, s);
    };
    double worst = 0.0;
    for (double x : char_identity_residuals(uniform, {0.5, 1.0, 2.0, 5.0})) worst = std::max(worst, std::abs(x));
    CHECK(worst > 1e-3);
}
