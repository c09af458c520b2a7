#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hortonlab/random.hpp"
#include "hortonlab/series.hpp"
#include "hortonlab/tree.hpp"

namespace hortonlab {

class CapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultMaxNodes = std::size_t{1} << 25;

// T_k for k >= 1: an explicit head T_1..T_m followed by a zero tail or a
// geometric tail T_k = a c^{k-1}.
struct TokunagaRule {
    std::vector<double> head;
    bool geometric_tail = false;
    double tail_a = 0.0;
    double tail_c = 0.0;

    double operator()(int k) const;
    // limsup T_k^{1/k}
    double growth() const;

    static TokunagaRule zero();
    static TokunagaRule list(std::vector<double> values);
    static TokunagaRule geometric(double a, double c, int explicit_terms = 0);
    // T_k = (c-1) c^{k-1}
    static TokunagaRule critical(double c, int explicit_terms = 8);
};

// lambda_j: explicit head, then gamma * zeta^{-j}.
struct RateRule {
    std::vector<double> head;
    double gamma = 1.0;
    double zeta = 1.0;

    double operator()(int j) const;
    static RateRule geometric(double gamma, double zeta);
};

// p_K: explicit list or geometric p (1-p)^{K-1}.
struct OrderDistribution {
    std::vector<double> probs;
    std::optional<double> p;

    double operator()(int K) const;
    static OrderDistribution geometric(double p);
    static OrderDistribution list(std::vector<double> probs);
};

struct ProcessParams {
    TokunagaRule tokunaga;
    RateRule rates;
    OrderDistribution orders;
    int max_order_cap = 64;

    void validate() const;
};

// p_K = p(1-p)^{K-1}, lambda_j = gamma zeta^{-j}.
struct SelfSimilarParams {
    double p = 0.5;
    double gamma = 1.0;
    double zeta = 2.0;
    TokunagaRule tokunaga = TokunagaRule::critical(2.0);

    ProcessParams expand() const;
};

// lambda_j = gamma c^{2-j}, p_K = 2^{-K}, T_k = (c-1) c^{k-1}.
struct CriticalTokunagaParams {
    double c = 2.0;
    double gamma = 1.0;

    ProcessParams expand() const;
};

struct WalkParams {
    double rho = 0.5;
    double lambda_up = 1.0;
    double lambda_down = 1.0;
};

struct BranchEvent {
    int order = 0;
    double birth = 0.0;
    double death = std::numeric_limits<double>::infinity();  // infinite when past the horizon
    int parent = kNone;
};

struct EventLog {
    std::vector<BranchEvent> branches;
    double horizon = std::numeric_limits<double>::infinity();
};

struct EventSample {
    Tree tree;  // empty unless the horizon is infinite
    EventLog log;
};

class HbpSampler {
public:
    explicit HbpSampler(ProcessParams params, std::size_t max_nodes = kDefaultMaxNodes);

    int draw_order(Rng& rng) const;
    Tree sample(Rng& rng) const;
    Tree sample_order(int K, Rng& rng) const;
    EventSample sample_events(Rng& rng, double horizon = std::numeric_limits<double>::infinity()) const;
    EventSample sample_events_order(int K, Rng& rng,
                                    double horizon = std::numeric_limits<double>::infinity()) const;

    const ProcessParams& params() const { return params_; }
    // 1 + T_1 + ... + T_{j-1}
    double side_total(int j) const { return total_[j]; }
    double rate(int j) const { return lambda_[j]; }
    double tokunaga(int k) const { return t_[k]; }

private:
    int draw_side_order(int j, Rng& rng) const;

    ProcessParams params_;
    std::size_t max_nodes_;
    int cap_;
    std::vector<double> t_, lambda_, total_;
    std::vector<std::vector<double>> side_cdf_;  // side_cdf_[j][i-1] = sum_{l<=i} T_{j-l}
    std::vector<double> order_cdf_;
};

Tree sample_hbp(const ProcessParams& params, std::uint64_t seed);
EventSample sample_hbp_events(const ProcessParams& params, std::uint64_t seed);

// Each vertex splits with probability 1 - p0; a planted root is prepended.
Tree sample_gw_shape(double p0, Rng& rng, std::size_t max_nodes = kDefaultMaxNodes);
Tree sample_gw_shape(double p0, std::uint64_t seed);
// Shape GW with p0 = (lambda + lambda')/(2 lambda), edges Exp(2 lambda).
Tree sample_exp_gw(double lambda_prime, double lambda, Rng& rng, std::size_t max_nodes = kDefaultMaxNodes);
Tree sample_exp_gw(double lambda_prime, double lambda, std::uint64_t seed);

enum class CountLaw { point, poisson, geometric };

// Side-branch count laws P_{k,K}; the mean is T_k for every K.
struct AttachmentLaw {
    CountLaw law = CountLaw::poisson;
    TokunagaRule means;

    int draw(int k, Rng& rng) const;
};

Tree sample_random_attachment(const AttachmentLaw& law, int K, Rng& rng);
Tree sample_random_attachment(const AttachmentLaw& law, int K, std::uint64_t seed);

// n values starting at 0 with increments from rho*Exp(lu)(x) + (1-rho)*Exp(ld)(-x).
TimeSeries sample_exp_walk(const WalkParams& params, std::size_t n, Rng& rng);
TimeSeries sample_exp_walk(const WalkParams& params, std::size_t n, std::uint64_t seed);

// Walk started at 0, conditioned on a first step up, run until it first
// returns to or below 0; the crossing point closes the excursion. Returns
// nothing when max_steps is exceeded.
std::optional<Excursion> sample_walk_excursion(const WalkParams& params, Rng& rng, std::size_t max_steps);

}  // namespace hortonlab
