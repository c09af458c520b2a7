#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "hortonlab/statistics.hpp"

using namespace hortonlab;
using testing::nw;

TEST_CASE("check bands") {
    CHECK(make_check("a", 1.0, 1.3, 0.1).pass);
    CHECK_FALSE(make_check("a", 1.0, 1.5, 0.1).pass);
    CHECK(make_check("a", 1.0, 1.0, 0.0).pass);
    CHECK_FALSE(make_exact_check("a", 1.0, 1.0 + 1e-6, 1e-8).pass);
    Report r;
    r.add(make_check("ok", 0, 0, 1));
    CHECK(r.pass());
    r.add(make_check("bad", 0, 10, 1));
    CHECK_FALSE(r.pass());
}

TEST_CASE("stat keys") {
    CHECK(stat_key("tok", 1, 3) == "tok:1:3");
    CHECK(stat_key("width", 4) == "width:4");
}

TEST_CASE("accumulator merge is exact and order independent") {
    Rng rng(61);
    std::normal_distribution<double> g(0.0, 10.0);
    std::vector<std::pair<double, double>> xs(2000);
    for (auto& [x, y] : xs) x = g(rng), y = g(rng);
    Accumulator whole;
    for (auto [x, y] : xs) whole.add_pair("k", x, y);
    Accumulator a, b, c;
    for (std::size_t i = 0; i < xs.size(); ++i) (i % 3 == 0 ? a : i % 3 == 1 ? b : c).add_pair("k", xs[i].first, xs[i].second);
    Accumulator m1 = a, m2 = c;
    m1.merge(b);
    m1.merge(c);
    m2.merge(a);
    m2.merge(b);
    CHECK(m1 == whole);
    CHECK(m2 == whole);
    whole.count("n", 2);
    CHECK(whole.counts("n") == 2);
    CHECK(whole.counts("other") == 0);
    CHECK_THROWS(whole.add("bad", std::nan("")));
}

TEST_CASE("moments and ratio standard error") {
    Accumulator acc;
    const std::vector<std::pair<double, double>> xy{{1, 2}, {2, 3}, {4, 9}, {3, 5}};
    for (auto [x, y] : xy) acc.add_pair("r", x, y);
    const auto m = acc.moments("r");
    CHECK(m.n == 4);
    CHECK(m.mean_x() == doctest::Approx(2.5));
    CHECK(m.var_x() == doctest::Approx(5.0 / 3.0));
    const double R = 19.0 / 10.0;
    CHECK(m.ratio() == doctest::Approx(R));
    double d = 0;
    for (auto [x, y] : xy) d += (y - R * x) * (y - R * x);
    CHECK(m.ratio_se() == doctest::Approx(std::sqrt(d / 3.0 * 4.0) / 10.0));
}

TEST_CASE("exact Tokunaga estimate on deterministic trees") {
    AttachmentLaw law{CountLaw::point, TokunagaRule::list({1.0, 2.0, 4.0})};
    std::vector<Tree> trees;
    Rng rng(62);
    for (int i = 0; i < 10; ++i) trees.push_back(sample_random_attachment(law, 4, rng));
    auto est = estimate_tokunaga(trees);
    CHECK(est.K == 4);
    CHECK(est.trees == 10);
    for (int j = 2; j <= 4; ++j)
        for (int i = 1; i < j; ++i) {
            CHECK(est.t[i][j] == law.means(j - i));
            CHECK(est.se[i][j] == doctest::Approx(0.0).epsilon(1e-9));
        }
    auto hs = horton_stats(trees);
    CHECK(hs.mean_counts[4] == 1.0);
    trees.push_back(nw("((,));"));
    CHECK_THROWS(estimate_tokunaga(trees));
    CHECK(estimate_tokunaga_pooled(trees).K == 4);
    CHECK_THROWS(estimate_tokunaga(std::span<const Tree>{}));
}

TEST_CASE("order distribution test") {
    Rng rng(63);
    std::geometric_distribution<int> geo(0.5);
    std::vector<int> orders(20000);
    for (auto& k : orders) k = 1 + geo(rng);
    auto fit = order_distribution_test(orders, 0.5);
    CHECK(fit.report.pass());
    CHECK(fit.p_mle == doctest::Approx(0.5).epsilon(0.03));
    CHECK_FALSE(order_distribution_test(orders, 0.45).report.pass());
    CHECK_THROWS(order_distribution_test(std::span<const int>{}));
}

TEST_CASE("census comparison") {
    Census a{{"x", 5000}, {"y", 5000}}, b{{"x", 5100}, {"y", 4900}}, c{{"x", 6000}, {"y", 4000}};
    CHECK(compare_census(a, b).report.pass());
    CHECK_FALSE(compare_census(a, c).report.pass());
    CHECK(compare_census(a, c).bins_tested == 2);
    CHECK(census_key(nw("((,(,)));")) == census_key(nw("(((,),));")));
    CHECK_THROWS(compare_census(a, Census{}));
}

TEST_CASE("prune invariance separates a self-similar process from subcritical Galton-Watson") {
    HbpSampler hbp(SelfSimilarParams{0.8, 1.0, 2.0, TokunagaRule::critical(2.0)}.expand());
    auto pos = prune_invariance_test([&](Rng& r) { return hbp.sample(r); }, 7, 8000, 4.0, 20.0);
    CHECK(pos.bins_tested >= 3);
    CHECK(pos.report.pass());
    auto neg = prune_invariance_test([](Rng& r) { return sample_gw_shape(0.7, r); }, 7, 8000, 4.0, 20.0);
    CHECK_FALSE(neg.report.pass());
}

TEST_CASE("side branch statistics of the hierarchical process") {
    auto pp = CriticalTokunagaParams{}.expand();
    HbpSampler s(pp);
    Rng rng(64);
    std::vector<Tree> trees;
    for (int i = 0; i < 300; ++i) trees.push_back(s.sample_order(6, rng));
    auto r = side_branch_test(trees, pp);
    CHECK(r.checks.size() > 10);
    CHECK(r.pass());
}

TEST_CASE("principal subtree law") {
    auto rule = TokunagaRule::critical(2.0);
    double total = 0.0;
    for (int a = 1; a <= 60; ++a)
        for (int b = 1; b <= 60; ++b) total += principal_joint_law(rule, 0.5, a, b);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (int a = 1; a <= 5; ++a)
        for (int b = 1; b <= 5; ++b) CHECK(principal_joint_law(rule, 0.5, a, b) == doctest::Approx(std::ldexp(1.0, -a - b)));
    double trunc = 0.0;
    for (int a = 1; a <= 8; ++a)
        for (int b = 1; b <= 8; ++b) trunc += principal_joint_law(rule, 0.5, a, b, 8);
    CHECK(trunc == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(principal_joint_law(TokunagaRule::critical(3.0), 0.5, 1, 1) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("vertex orders") {
    Tree t = nw("((,((,(,)),((,(,(,))),(,)))));");
    auto v = vertex_order_counts(t, horton_orders(t));
    CHECK(v[1] == 10);
    CHECK(v[1] + v[2] + v[3] == 19);
    auto ev = expected_vertex_counts(TokunagaRule::critical(2.0), 2);
    CHECK(ev[1] == 3.0);
    CHECK(ev[2] == 2.0);
    auto big = expected_vertex_counts(TokunagaRule::critical(2.0), 30);
    CHECK(big[2] / big[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("vertex order frequencies of order-6 critical trees") {
    const HbpSampler s(CriticalTokunagaParams{2.0, 1.0}.expand());
    std::vector<Tree> trees;
    Rng rng(66);
    for (int i = 0; i < 300; ++i) trees.push_back(s.sample_order(6, rng));
    const auto r = vertex_order_frequencies(trees, TokunagaRule::critical(2.0));
    CHECK(r.pass());
    int limit = 0;
    for (const auto& c : r.checks) limit += c.name.find("finite") == std::string::npos;
    CHECK(limit == 3);  // identity, V_2/V_1 and the order-2 fraction
    CHECK_FALSE(vertex_order_frequencies(trees, TokunagaRule::critical(3.0)).pass());
    trees.push_back(s.sample_order(5, rng));
    CHECK_THROWS(vertex_order_frequencies(trees));
}

TEST_CASE("uniform points land on positive-length edges") {
    Tree t = nw("((:0,:0):1);");
    Rng rng(65);
    for (int o : uniform_point_orders(t, horton_orders(t), 100, rng)) CHECK(o == 2);
    Tree u = nw("((:1,:1):0);");
    for (int o : uniform_point_orders(u, horton_orders(u), 100, rng)) CHECK(o == 1);
    CHECK_THROWS(uniform_point_order(nw("((,));"), 1u));
}

TEST_CASE("width of explicit trees") {
    const std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 3.0};
    std::vector<Tree> trees{nw("((:1,:2):1);")};
    auto w = empirical_width(trees, grid);
    CHECK(w.c == std::vector<double>{1, 1, 2, 2, 0});
    EventLog log;
    log.branches.push_back({2, 0.0, 1.0, kNone});
    log.branches.push_back({1, 1.0, 2.0, 0});
    log.branches.push_back({1, 1.0, 3.0, 0});
    std::vector<EventLog> logs{log};
    CHECK(empirical_width(logs, grid).c == std::vector<double>{1, 1, 2, 2, 0});
    CHECK_THROWS(empirical_width(trees, std::vector<double>{1.0, 0.0}));
}

TEST_CASE("complete subtrees") {
    Tree t = nw("((,((,(,)),((,(,(,))),(,)))));");
    Rng rng(66);
    auto s = random_complete_subtree(t, 3, rng);
    REQUIRE(s);
    CHECK(plane_equal(*s, t));
    CHECK_FALSE(random_complete_subtree(t, 4, rng));
    for (int i = 0; i < 20; ++i) CHECK(horton_orders(*random_complete_subtree(t, 2, rng)).tree_order == 2);
}

TEST_CASE("coordination of the critical process") {
    HbpSampler s(CriticalTokunagaParams{}.expand());
    const std::vector<int> H{3, 4};
    auto r = coordination_test(s, 2, H, 3000, 5);
    CHECK(r.checks.size() >= 4);
    CHECK(r.pass());
}
