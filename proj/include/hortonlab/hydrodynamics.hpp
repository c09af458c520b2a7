#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hortonlab/samplers.hpp"
#include "hortonlab/series.hpp"

namespace hortonlab {

// -1 + 2z + sum_k z^k T_k; throws outside the radius of convergence.
double t_hat(double z, const TokunagaRule& rule);

// 1/w0 for the root w0 of t_hat in (0, 1/2], by bisection.
double horton_exponent(const TokunagaRule& rule);

struct GeneratorSpec {
    TokunagaRule tokunaga;
    RateRule rates;
    int kmax = 1;
    std::vector<double> pi;  // pi[j-1] = initial mass of order j
    double dropped_mass = 0.0;
};

// Truncates geometric pi at the first kmax with (1-p)^kmax < tail_tol. With
// self_similar set, rates must satisfy zeta >= max(1, L).
GeneratorSpec geometric_spec(const TokunagaRule& rule, const RateRule& rates, double p, double tail_tol = 1e-12,
                             bool self_similar = true);
GeneratorSpec explicit_spec(const TokunagaRule& rule, const RateRule& rates, std::vector<double> pi, int kmax);

struct StateVector {
    std::vector<double> s;
    std::vector<std::vector<double>> x;  // x[i][j-1] at s[i]
    std::vector<double> tail_bound;

    double total(std::size_t i) const;
};

// x' = G Lambda x truncated to kmax orders, adaptive Dormand-Prince.
StateVector ode_solve(const GeneratorSpec& spec, const std::vector<double>& s_grid, double tol = 1e-10,
                      std::optional<double> max_tail_bound = std::nullopt);

// Series for C(s) of the self-similar process (p, gamma, zeta).
WidthSeries width_series(double p, double gamma, double zeta, const TokunagaRule& rule,
                         const std::vector<double>& s_grid);

// Lambda = I, x(0) = e_K; x[i][K-m-1] = x_{K-m}(s_i).
StateVector width_closed_form_unit_rates(const TokunagaRule& rule, int K, const std::vector<double>& s_grid);

enum class Criticality { subcritical_decreasing, critical, supercritical_increasing };

std::string to_string(Criticality c);

Criticality classify_criticality(double p, double zeta, const TokunagaRule& rule);

struct InvarianceResidual {
    std::vector<double> s;
    std::vector<double> l1;  // ||x(s) - pi||_1
    double algebraic = 0.0;  // max_K |lambda_K p_K R^K - b|
    double b = 0.0;          // mean of lambda_K p_K R^K
    double R = 0.0;
};

InvarianceResidual time_invariance_residual(const GeneratorSpec& spec, const std::vector<double>& s_values);

}  // namespace hortonlab
