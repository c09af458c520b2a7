#include <doctest.h>

#include <cmath>

#include "hortonlab/hydrodynamics.hpp"

using namespace hortonlab;

TEST_CASE("t_hat closed forms") {
    for (double c : {2.0, 3.0}) {
        auto rule = TokunagaRule::critical(c);
        for (int i = 1; i <= 20; ++i) {
            const double z = 0.9 * i / (20.0 * c);
            const double closed = -1.0 + 2.0 * z + (c - 1.0) * z / (1.0 - c * z);
            CHECK(std::abs(t_hat(z, rule) - closed) <= 1e-12);
        }
        CHECK_THROWS_AS(t_hat(1.0 / c, rule), std::domain_error);
    }
    CHECK(t_hat(0.25, TokunagaRule::list({1.0})) == -1.0 + 0.5 + 0.25);
}

TEST_CASE("Horton exponents") {
    CHECK(std::abs(horton_exponent(TokunagaRule::critical(2.0)) - 4.0) < 1e-10);
    CHECK(std::abs(horton_exponent(TokunagaRule::critical(3.0)) - 6.0) < 1e-10);
    CHECK(horton_exponent(TokunagaRule::zero()) == 2.0);
    CHECK(std::abs(horton_exponent(TokunagaRule::list({1.0})) - 3.0) < 1e-12);
}

TEST_CASE("geometric spec truncation") {
    auto g = geometric_spec(TokunagaRule::critical(2.0), RateRule::geometric(4.0, 2.0), 0.5, 1e-6);
    CHECK(g.kmax == 20);
    CHECK(g.dropped_mass == std::ldexp(1.0, -20));
    CHECK(g.pi[0] == 0.5);
    CHECK_THROWS(geometric_spec(TokunagaRule::critical(2.0), RateRule::geometric(1.0, 1.5), 0.5));
    auto e = explicit_spec(TokunagaRule::zero(), RateRule::geometric(1.0, 1.0), {0.5, 0.25, 0.25}, 2);
    CHECK(e.dropped_mass == 0.25);
    CHECK(e.pi.size() == 2);
}

TEST_CASE("ode matches the unit-rate closed form") {
    auto rule = TokunagaRule::critical(2.0);
    RateRule unit;
    unit.head.assign(5, 1.0);
    auto spec = explicit_spec(rule, unit, {0, 0, 0, 0, 1}, 5);
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(0.1 * i);
    auto ode = ode_solve(spec, grid, 1e-12);
    auto exact = width_closed_form_unit_rates(rule, 5, grid);
    REQUIRE(ode.x.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (int j = 0; j < 5; ++j) CHECK(std::abs(ode.x[i][j] - exact.x[i][j]) < 1e-8);
    CHECK(exact.x[0][4] == 1.0);
}

TEST_CASE("ode observes a grid without 0") {
    auto spec = geometric_spec(TokunagaRule::critical(2.0), RateRule::geometric(4.0, 2.0), 0.5);
    auto sol = ode_solve(spec, {0.5, 1.0});
    REQUIRE(sol.s.size() == 2);
    CHECK(sol.s[0] == 0.5);
    CHECK(std::abs(sol.total(1) - 1.0) < 1e-8);
    CHECK(sol.tail_bound[1] == doctest::Approx(spec.dropped_mass * std::exp(2.0)));
    CHECK_THROWS(ode_solve(spec, {1.0, 0.5}));
    CHECK_THROWS(ode_solve(spec, {0.0, 50.0}, 1e-10, 1e-9));
}

TEST_CASE("critical width series is exactly one") {
    auto rule = TokunagaRule::critical(2.0);
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(0.1 * i);
    auto w = width_series(1.0 - 2.0 / 4.0, 1.0, 2.0, rule, grid);
    for (double c : w.c) CHECK(c == 1.0);
}

TEST_CASE("unit zeta width series is an exponential") {
    auto rule = TokunagaRule::list({0.5, 0.25});
    const double p = 0.3, gamma = 0.7;
    const double rate = gamma * t_hat(1.0 - p, rule);
    std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 5.0};
    auto w = width_series(p, gamma, 1.0, rule, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(w.c[i] - std::exp(grid[i] * rate)) < 1e-12);
}

TEST_CASE("width series with one nonzero term is linear") {
    auto rule = TokunagaRule::list({1.0});
    const double zeta = 1.5, p = 1.0 - zeta * zeta / 3.0;
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i);
    auto w = width_series(p, 1.0, zeta, rule, grid);
    for (std::size_t i = 0; i + 2 < grid.size(); ++i) CHECK(std::abs(w.c[i + 2] - 2.0 * w.c[i + 1] + w.c[i]) < 1e-8);
    const double slope = t_hat((1.0 - p) / zeta, rule) * p / (1.0 - (1.0 - p) / zeta) / zeta;
    CHECK(w.c[1] - w.c[0] == doctest::Approx(slope));
}

TEST_CASE("criticality classes") {
    auto rule = TokunagaRule::critical(2.0);
    CHECK(classify_criticality(0.5, 2.0, rule) == Criticality::critical);
    CHECK(classify_criticality(0.6, 2.0, rule) == Criticality::subcritical_decreasing);
    CHECK(classify_criticality(0.4, 2.0, rule) == Criticality::supercritical_increasing);
    CHECK(classify_criticality(0.1, 4.0, rule) == Criticality::subcritical_decreasing);
    CHECK(to_string(Criticality::critical) == "critical");
}

TEST_CASE("critical Tokunaga process is time invariant") {
    auto spec = geometric_spec(TokunagaRule::critical(2.0), RateRule::geometric(4.0, 2.0), 0.5);
    auto r = time_invariance_residual(spec, {0.0, 1.0, 2.0});
    CHECK(r.R == 4.0);
    CHECK(r.algebraic < 1e-9);
    CHECK(r.b == doctest::Approx(4.0));
    for (double d : r.l1) CHECK(d < 1e-7);
    auto off = geometric_spec(TokunagaRule::critical(2.0), RateRule::geometric(4.0, 2.0), 0.4);
    auto r2 = time_invariance_residual(off, {0.0, 1.0});
    CHECK(r2.algebraic > 0.1);
    CHECK(r2.l1[1] > 1e-3);
}
