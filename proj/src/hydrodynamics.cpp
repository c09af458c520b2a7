#include "hortonlab/hydrodynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

namespace hortonlab {

namespace {

void check_zeta(double zeta, const TokunagaRule& rule) {
    if (zeta < std::max(1.0, rule.growth())) throw std::invalid_argument("zeta must be at least max(1, L)");
}

}  // namespace

double t_hat(double z, const TokunagaRule& rule) {
    const bool tail = rule.geometric_tail && rule.tail_a != 0.0;
    if (tail && !(std::abs(z) * rule.tail_c < 1.0))
        throw std::domain_error("t_hat: z outside the radius of convergence");
    double sum = -1.0 + 2.0 * z;
    double zk = 1.0;
    for (double tk : rule.head) {
        zk *= z;
        sum += zk * tk;
    }
    if (tail) {
        const int m = static_cast<int>(rule.head.size());
        sum += rule.tail_a * std::pow(z, m + 1) * std::pow(rule.tail_c, m) / (1.0 - rule.tail_c * z);
    }
    return sum;
}

double horton_exponent(const TokunagaRule& rule) {
    const double L = rule.geometric_tail && rule.tail_a != 0.0 ? rule.tail_c : 0.0;
    double hi = 0.5;
    if (L >= 2.0) hi = std::nextafter(1.0 / L, 0.0);
    double lo = 0.0;
    const double fhi = t_hat(hi, rule);
    if (fhi == 0.0) return 1.0 / hi;
    if (!(fhi > 0.0)) throw std::domain_error("horton_exponent: no sign change of t_hat in (0, 1/2]");
    for (;;) {
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi) break;
        const double f = t_hat(mid, rule);
        if (f == 0.0) return 1.0 / mid;
        (f < 0.0 ? lo : hi) = mid;
    }
    return 2.0 / (lo + hi);
}

GeneratorSpec geometric_spec(const TokunagaRule& rule, const RateRule& rates, double p, double tail_tol,
                             bool self_similar) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geometric initial law needs 0 < p <= 1");
    if (!(tail_tol > 0.0)) throw std::invalid_argument("tail tolerance must be positive");
    if (self_similar && rates.head.empty()) check_zeta(rates.zeta, rule);
    GeneratorSpec g;
    g.tokunaga = rule;
    g.rates = rates;
    int k = 1;
    double tail = 1.0 - p;
    while (tail >= tail_tol) {
        tail *= 1.0 - p;
        if (++k > 4096) throw std::invalid_argument("geometric_spec: truncation order above 4096");
    }
    g.kmax = k;
    g.dropped_mass = tail;
    for (int j = 1; j <= k; ++j) g.pi.push_back(p * std::pow(1.0 - p, j - 1));
    return g;
}

GeneratorSpec explicit_spec(const TokunagaRule& rule, const RateRule& rates, std::vector<double> pi, int kmax) {
    if (kmax < 1) throw std::invalid_argument("truncation order must be at least 1");
    GeneratorSpec g;
    g.tokunaga = rule;
    g.rates = rates;
    g.kmax = kmax;
    double kept = 0.0, all = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        if (!(pi[j] >= 0.0)) throw std::invalid_argument("initial masses must be nonnegative");
        all += pi[j];
        if (static_cast<int>(j) < kmax) kept += pi[j];
    }
    pi.resize(kmax, 0.0);
    g.pi = std::move(pi);
    g.dropped_mass = all - kept;
    return g;
}

double StateVector::total(std::size_t i) const {
    double s = 0.0;
    for (double v : x[i]) s += v;
    return s;
}

StateVector ode_solve(const GeneratorSpec& spec, const std::vector<double>& s_grid, double tol,
                      std::optional<double> max_tail_bound) {
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<double>;
    const int K = spec.kmax;
    if (K < 1 || static_cast<int>(spec.pi.size()) != K) throw std::invalid_argument("ode_solve: malformed generator spec");
    if (s_grid.empty()) throw std::invalid_argument("ode_solve: empty grid");
    if (s_grid.front() < 0.0 || !std::is_sorted(s_grid.begin(), s_grid.end()))
        throw std::invalid_argument("ode_solve: grid must be sorted and nonnegative");

    std::vector<double> lambda(K + 1), g(K + 1, 0.0);
    for (int j = 1; j <= K; ++j) {
        lambda[j] = spec.rates(j);
        if (!(lambda[j] > 0.0)) throw std::invalid_argument("ode_solve: rates must be positive");
        g[j] = spec.tokunaga(j) + (j == 1 ? 2.0 : 0.0);
    }
    auto rhs = [&](const State& x, State& dx, double) {
        State y(K);
        for (int j = 0; j < K; ++j) y[j] = lambda[j + 1] * x[j];
        for (int i = 0; i < K; ++i) {
            double acc = -y[i];
            for (int j = i + 1; j < K; ++j) acc += g[j - i] * y[j];
            dx[i] = acc;
        }
    };

    // growth rate bound for the dropped orders
    double sup = 0.0;
    double S = 1.0;
    for (int j = 1; j <= K + 64; ++j) {
        if (j > 1) S += spec.tokunaga(j - 1);
        sup = std::max(sup, spec.rates(j) * S);
    }

    StateVector out;
    std::vector<double> times = s_grid;
    bool skip = times.front() > 0.0;
    if (skip) times.insert(times.begin(), 0.0);
    State x = spec.pi;
    auto observe = [&](const State& state, double t) {
        if (skip) {
            skip = false;
            return;
        }
        out.s.push_back(t);
        out.x.push_back(state);
        out.tail_bound.push_back(spec.dropped_mass * std::exp(t * sup));
    };
    try {
        if (times.size() == 1) {
            observe(x, times.front());
        } else {
            auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<State>());
            odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), 1e-3, observe);
        }
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("ode_solve: integration failed: ") + e.what());
    }
    if (max_tail_bound)
        for (double b : out.tail_bound)
            if (b > *max_tail_bound) throw std::runtime_error("ode_solve: truncation tail bound above threshold");
    return out;
}

WidthSeries width_series(double p, double gamma, double zeta, const TokunagaRule& rule,
                         const std::vector<double>& s_grid) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("width_series: p must lie in (0,1)");
    if (!(gamma > 0.0)) throw std::invalid_argument("width_series: gamma must be positive");
    check_zeta(zeta, rule);
    WidthSeries w;
    w.method = "series";
    for (double s : s_grid) {
        const double x = s * gamma / zeta;
        double sum = 1.0, prod = 1.0, pw = 1.0, shrink = 1.0;
        int small = 0, m = 0;
        for (m = 1;; ++m) {
            if (m > 100000) throw std::runtime_error("width_series: series did not converge");
            shrink /= zeta;
            prod *= t_hat(shrink * (1.0 - p), rule);
            if (prod == 0.0) break;
            pw *= x / m;
            const double term = pw * prod * p / (1.0 - shrink * (1.0 - p));
            sum += term;
            small = std::abs(term) < 1e-14 * std::abs(sum) ? small + 1 : 0;
            if (small >= 3 && m > x) break;
        }
        w.s.push_back(s);
        w.c.push_back(sum);
        w.terms.push_back(m);
    }
    return w;
}

StateVector width_closed_form_unit_rates(const TokunagaRule& rule, int K, const std::vector<double>& s_grid) {
    if (K < 1) throw std::invalid_argument("width_closed_form_unit_rates: K must be at least 1");
    std::vector<double> u(K, 0.0);
    for (int j = 1; j < K; ++j) u[j] = rule(j) + (j == 1 ? 2.0 : 0.0);
    // conv[n][m]: n-fold convolution of u evaluated at m
    std::vector<std::vector<double>> conv(K, std::vector<double>(K, 0.0));
    conv[0][0] = 1.0;
    for (int n = 1; n < K; ++n)
        for (int m = n; m < K; ++m)
            for (int j = 1; j <= m - n + 1; ++j) conv[n][m] += u[j] * conv[n - 1][m - j];
    StateVector out;
    for (double s : s_grid) {
        std::vector<double> x(K, 0.0);
        for (int m = 0; m < K; ++m) {
            double sum = 0.0, pw = 1.0;
            for (int n = 0; n <= m; ++n) {
                if (n > 0) pw *= s / n;
                sum += conv[n][m] * pw;
            }
            x[K - m - 1] = std::exp(-s) * sum;
        }
        out.s.push_back(s);
        out.x.push_back(std::move(x));
        out.tail_bound.push_back(0.0);
    }
    return out;
}

std::string to_string(Criticality c) {
    switch (c) {
        case Criticality::subcritical_decreasing: return "subcritical-decreasing";
        case Criticality::critical: return "critical";
        case Criticality::supercritical_increasing: return "supercritical-increasing";
    }
    return "";
}

Criticality classify_criticality(double p, double zeta, const TokunagaRule& rule) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("classify_criticality: p must lie in (0,1)");
    check_zeta(zeta, rule);
    const double R = horton_exponent(rule);
    if (zeta >= R) return Criticality::subcritical_decreasing;
    const double pc = 1.0 - zeta / R;
    if (std::abs(p - pc) <= 1e-12) return Criticality::critical;
    return p > pc ? Criticality::subcritical_decreasing : Criticality::supercritical_increasing;
}

InvarianceResidual time_invariance_residual(const GeneratorSpec& spec, const std::vector<double>& s_values) {
    InvarianceResidual r;
    const auto sol = ode_solve(spec, s_values);
    r.s = sol.s;
    for (const auto& x : sol.x) {
        double d = 0.0;
        for (int j = 0; j < spec.kmax; ++j) d += std::abs(x[j] - spec.pi[j]);
        r.l1.push_back(d);
    }
    r.R = horton_exponent(spec.tokunaga);
    std::vector<double> a;
    for (int K = 1; K <= spec.kmax; ++K) a.push_back(spec.rates(K) * spec.pi[K - 1] * std::pow(r.R, K));
    for (double v : a) r.b += v;
    r.b /= static_cast<double>(a.size());
    for (double v : a) r.algebraic = std::max(r.algebraic, std::abs(v - r.b));
    return r;
}

}  // namespace hortonlab
