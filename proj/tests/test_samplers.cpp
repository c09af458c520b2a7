#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "hortonlab/pruning.hpp"
#include "hortonlab/samplers.hpp"

using namespace hortonlab;

TEST_CASE("rules") {
    auto crit = TokunagaRule::critical(3.0, 2);
    CHECK(crit(1) == 2.0);
    CHECK(crit(2) == 6.0);
    CHECK(crit(5) == 2.0 * 81.0);
    CHECK(crit.growth() == 3.0);
    CHECK(TokunagaRule::list({1.0, 2.0})(3) == 0.0);
    CHECK(TokunagaRule::zero().growth() == 0.0);
    auto rates = RateRule::geometric(4.0, 2.0);
    CHECK(rates(1) == 2.0);
    CHECK(rates(3) == 0.5);
    CHECK(OrderDistribution::geometric(0.5)(3) == 0.125);
    CHECK(OrderDistribution::list({0.25, 0.75})(3) == 0.0);
}

TEST_CASE("parameter validation") {
    SelfSimilarParams bad_zeta;
    bad_zeta.zeta = 1.5;
    CHECK_THROWS(bad_zeta.expand());
    SelfSimilarParams bad_p;
    bad_p.p = 1.0;
    CHECK_THROWS(bad_p.expand());
    ProcessParams pp;
    pp.orders = OrderDistribution::list({0.5, 0.4});
    CHECK_THROWS(HbpSampler(pp));
    pp.orders = OrderDistribution::list({0.5, 0.5});
    pp.tokunaga = TokunagaRule::list({-1.0});
    CHECK_THROWS(HbpSampler(pp));
    auto ct = CriticalTokunagaParams{3.0, 1.0}.expand();
    CHECK(ct.rates(2) == doctest::Approx(1.0));
    CHECK(*ct.orders.p == 0.5);
}

TEST_CASE("direct sampler produces reduced trees of the requested order") {
    HbpSampler s(CriticalTokunagaParams{}.expand());
    Rng rng(41);
    for (int K = 1; K <= 7; ++K)
        for (int i = 0; i < 30; ++i) {
            Tree t = s.sample_order(K, rng);
            CHECK(validate(t).valid);
            CHECK(horton_orders(t).tree_order == K);
            CHECK(order_by_pruning(t) == K);
        }
}

TEST_CASE("zero Tokunaga rule gives perfect binary trees") {
    ProcessParams pp;
    pp.orders = OrderDistribution::list({0.0, 0.0, 0.0, 1.0});
    HbpSampler s(pp);
    Rng rng(1);
    Tree t = s.sample(rng);
    CHECK(t.leaf_count() == 8);
    CHECK(horton_orders(t).tree_order == 4);
}

TEST_CASE("samplers are deterministic in the seed") {
    auto pp = CriticalTokunagaParams{}.expand();
    for (std::uint64_t seed : {1u, 2u, 99u}) {
        CHECK(plane_equal(sample_hbp(pp, seed), sample_hbp(pp, seed), 0.0));
        CHECK(plane_equal(sample_hbp_events(pp, seed).tree, sample_hbp_events(pp, seed).tree, 0.0));
        CHECK(plane_equal(sample_exp_gw(0.0, 1.0, seed), sample_exp_gw(0.0, 1.0, seed), 0.0));
        CHECK(sample_exp_walk({}, 100, seed).values == sample_exp_walk({}, 100, seed).values);
    }
}

TEST_CASE("event sampler tree and log agree") {
    HbpSampler s(CriticalTokunagaParams{}.expand());
    Rng rng(42);
    for (int K = 1; K <= 6; ++K)
        for (int i = 0; i < 30; ++i) {
            auto e = s.sample_events_order(K, rng);
            CHECK(validate(e.tree).valid);
            CHECK(horton_orders(e.tree).tree_order == K);
            auto d = branch_decompose(e.tree, horton_orders(e.tree));
            CHECK(e.log.branches.size() == d.branches.size());
            for (const auto& b : e.log.branches) {
                CHECK(std::isfinite(b.death));
                CHECK(b.death > b.birth);
                if (b.parent != kNone) CHECK(e.log.branches[b.parent].order >= b.order);
            }
        }
}

TEST_CASE("event sampler horizon censors branches") {
    HbpSampler s(CriticalTokunagaParams{}.expand());
    Rng rng(43);
    for (int i = 0; i < 100; ++i) {
        auto e = s.sample_events_order(6, rng, 0.5);
        CHECK(e.tree.is_empty());
        for (const auto& b : e.log.branches) {
            CHECK(b.birth < 0.5);
            CHECK((std::isinf(b.death) || b.death < 0.5));
        }
    }
}

TEST_CASE("critical Galton-Watson and size cap") {
    Rng rng(44);
    CHECK(sample_gw_shape(1.0, rng).leaf_count() == 1);
    CHECK_THROWS_AS(sample_gw_shape(0.0, rng, 1000), CapError);
    CHECK_THROWS(sample_exp_gw(1.0, 1.0, rng));
    CHECK_THROWS(sample_gw_shape(1.5, rng));
}

TEST_CASE("order cap raises") {
    auto pp = CriticalTokunagaParams{}.expand();
    pp.max_order_cap = 3;
    HbpSampler s(pp);
    Rng rng(45);
    CHECK_THROWS_AS(s.sample_order(4, rng), CapError);
}

TEST_CASE("point attachment hits Tokunaga counts exactly") {
    AttachmentLaw law{CountLaw::point, TokunagaRule::list({1.0, 2.0, 4.0, 8.0})};
    Rng rng(46);
    for (int i = 0; i < 20; ++i) {
        Tree t = sample_random_attachment(law, 5, rng);
        CHECK(validate(t).valid);
        auto h = horton_orders(t);
        REQUIRE(h.tree_order == 5);
        auto d = branch_decompose(t, h);
        for (int j = 2; j <= 5; ++j)
            for (int k = 1; k < j; ++k) CHECK(d.side_count(k, j) == static_cast<std::int64_t>(law.means(j - k)) * d.count(j));
    }
}

TEST_CASE("random attachment keeps the order") {
    for (auto l : {CountLaw::poisson, CountLaw::geometric}) {
        AttachmentLaw law{l, TokunagaRule::critical(2.0)};
        Rng rng(47);
        for (int i = 0; i < 20; ++i) CHECK(horton_orders(sample_random_attachment(law, 5, rng)).tree_order == 5);
    }
    Rng rng(1);
    CHECK_THROWS(AttachmentLaw{CountLaw::point, TokunagaRule::list({0.5})}.draw(1, rng));
}

TEST_CASE("exponential walk") {
    auto w = sample_exp_walk({0.5, 1.0, 1.0}, 10, 3u);
    CHECK(w.values.size() == 10);
    CHECK(w.values[0] == 0.0);
    CHECK_THROWS(sample_exp_walk({2.0, 1.0, 1.0}, 10, 3u));
}

TEST_CASE("walk excursions are positive and close at zero") {
    Rng rng(48);
    int done = 0;
    for (int i = 0; i < 500; ++i) {
        auto e = sample_walk_excursion({0.5, 1.0, 1.0}, rng, 10000);
        if (!e) continue;
        ++done;
        CHECK(e->values.front() == 0.0);
        CHECK(e->values.back() == 0.0);
        for (std::size_t k = 1; k + 1 < e->values.size(); ++k) CHECK(e->values[k] > 0.0);
        for (std::size_t k = 1; k < e->times.size(); ++k) CHECK(e->times[k] > e->times[k - 1]);
    }
    CHECK(done > 450);
}
