#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hortonlab/random.hpp"
#include "hortonlab/samplers.hpp"
#include "hortonlab/series.hpp"
#include "hortonlab/tree.hpp"

namespace hortonlab {

// One comparison of an estimate against a target. With se > 0 the check
// passes when |observed - expected| <= band * se; with se == 0 it needs
// agreement within tol.
struct Check {
    std::string name;
    double observed = 0.0;
    double expected = 0.0;
    double se = 0.0;
    double band = 4.0;
    double tol = 1e-12;
    bool pass = false;
};

Check make_check(std::string name, double observed, double expected, double se, double band = 4.0);
Check make_exact_check(std::string name, double observed, double expected, double tol);

struct Report {
    std::string name;
    std::vector<Check> checks;
    std::vector<std::string> notes;

    bool pass() const;
    void add(Check c) { checks.push_back(std::move(c)); }
};

struct Moments {
    std::int64_t n = 0;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;

    double mean_x() const { return n ? sx / n : 0.0; }
    double mean_y() const { return n ? sy / n : 0.0; }
    double var_x() const;
    // standard error of mean_x
    double se_x() const;
    // sum y / sum x
    double ratio() const { return sx != 0.0 ? sy / sx : 0.0; }
    // delta-method standard error of the ratio, one pair per cluster
    double ratio_se() const;
};

// Mergeable sums kept in 2^-40 fixed point, so any split and merge order of a
// stream gives bit-identical totals.
class Accumulator {
public:
    void add(std::string_view key, double x);
    void add_pair(std::string_view key, double x, double y);
    void count(std::string_view key, std::int64_t by = 1);
    void merge(const Accumulator& other);

    Moments moments(std::string_view key) const;
    std::int64_t counts(std::string_view key) const;
    const std::map<std::string, std::int64_t, std::less<>>& count_table() const { return counts_; }
    std::vector<std::string> moment_keys() const;

    bool operator==(const Accumulator& other) const;

private:
    struct Exact {
        std::int64_t n = 0;
        __int128 sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        bool operator==(const Exact&) const = default;
    };
    std::map<std::string, Exact, std::less<>> sums_;
    std::map<std::string, std::int64_t, std::less<>> counts_;
};

std::string stat_key(std::string_view base, int i, int j = -1);

// --- Tokunaga and Horton ----------------------------------------------------

struct TokunagaEstimate {
    int K = 0;
    std::int64_t trees = 0;
    // 1-based [i][j] for 1 <= i < j <= K
    std::vector<std::vector<double>> t, se;
    std::vector<std::vector<std::int64_t>> nij_total;
    std::vector<std::int64_t> nj_total;
};

// Adds per-tree (N_j, N_{i,j}) pairs under keys "tok:i:j".
void accumulate_tokunaga(Accumulator& acc, const BranchDecomposition& d);
TokunagaEstimate tokunaga_from(const Accumulator& acc, int K);

// Ratio of sums over a sample of order-K trees.
TokunagaEstimate estimate_tokunaga(std::span<const Tree> trees);
// Same estimator without the common-order requirement.
TokunagaEstimate estimate_tokunaga_pooled(std::span<const Tree> trees);

struct HortonStats {
    int K = 0;
    std::vector<double> mean_counts;  // 1-based N_k[K]
    std::vector<double> ratios;       // N_k / N_1
    double R = 0.0;
};

HortonStats horton_stats(std::span<const Tree> trees);

// --- order distribution -----------------------------------------------------

struct OrderFit {
    std::vector<double> p_hat;  // 1-based
    double p_mle = 0.0;
    double chi2 = 0.0;
    int bins = 0;
    Report report;
};

// Compares the empirical order law to the fitted geometric, or to
// p(1-p)^{K-1} for a given target p.
OrderFit order_distribution_test(std::span<const int> orders, std::optional<double> target_p = std::nullopt,
                                 double band = 4.0, double min_expected = 5.0);
OrderFit order_distribution_test(std::span<const Tree> trees, std::optional<double> target_p = std::nullopt,
                                 double band = 4.0, double min_expected = 5.0);

// --- shape census and prune invariance --------------------------------------

using Census = std::map<std::string, std::int64_t>;

// Canonical shape string up to 12 leaves, otherwise "K=<order>,N1=<leaves>".
std::string census_key(const Tree& tree, int max_leaves = 12);

struct CensusComparison {
    double chi2 = 0.0;
    int bins_tested = 0;
    Report report;
};

// Two-sample proportion z-test per bin with at least min_expected counts in
// both samples.
CensusComparison compare_census(const Census& a, const Census& b, double band = 4.0, double min_expected = 50.0);

using TreeSampler = std::function<Tree(Rng&)>;

// Trees with even stream index feed the original census; odd ones are pruned
// and, if nonempty, feed the pruned census.
CensusComparison prune_invariance_test(const TreeSampler& sampler, std::uint64_t seed, std::uint64_t n,
                                       double band = 4.0, double min_expected = 50.0);

// --- side branches ----------------------------------------------------------

void accumulate_side_branches(Accumulator& acc, const Tree& tree, const BranchDecomposition& d);
Report side_branch_report(const Accumulator& acc, const ProcessParams& params, int max_order,
                          double band = 4.0, std::int64_t min_branches = 30);
Report side_branch_test(std::span<const Tree> trees, const ProcessParams& params, double band = 4.0);

// --- principal subtrees -----------------------------------------------------

// Orders of the two subtrees below the first internal vertex, in random order.
std::optional<std::pair<int, int>> principal_orders(const Tree& tree, const HortonOrderAssignment& h, Rng& rng);

// P(K_a = a, K_b = b | 2 <= K <= kmax) for geometric p_K with Tokunaga rule T.
double principal_joint_law(const TokunagaRule& rule, double p, int a, int b, int kmax = 1 << 20);

struct PrincipalStats {
    std::int64_t n = 0;
    std::map<std::pair<int, int>, std::int64_t> joint;
    Report report;
};

PrincipalStats principal_subtree_stats(std::span<const std::pair<int, int>> pairs, const TokunagaRule& rule, double p,
                                       int kmax, double band = 4.0, int max_cell = 4);
PrincipalStats principal_subtree_stats(std::span<const Tree> trees, std::uint64_t seed, const TokunagaRule& rule,
                                       double p, int kmax, double band = 4.0, int max_cell = 4);

// --- vertex orders and uniform points ---------------------------------------

// V_k per tree (non-root vertices of order k), 1-based.
std::vector<std::int64_t> vertex_order_counts(const Tree& tree, const HortonOrderAssignment& h);
// Exact E V_k[K] from branch-count expectations and mean branch sizes.
std::vector<double> expected_vertex_counts(const TokunagaRule& rule, int K);

inline constexpr int kVertexLimitMargin = 4;

// Per-tree identity V = 2 V_1 - 1; ratios V_k/V_1 against 2^{1-k} and vertex
// fractions (k >= 2) against 2^{-k} for k <= K - kVertexLimitMargin; with a
// rule, every k also against the exact finite-K expectations.
Report vertex_order_frequencies(std::span<const Tree> trees, const std::optional<TokunagaRule>& rule = std::nullopt,
                                double band = 4.0);

// Order of the edge holding a point drawn uniformly along the tree.
int uniform_point_order(const Tree& tree, const HortonOrderAssignment& h, Rng& rng);
int uniform_point_order(const Tree& tree, std::uint64_t seed);
std::vector<int> uniform_point_orders(const Tree& tree, const HortonOrderAssignment& h, int count, Rng& rng);

// --- width function ---------------------------------------------------------

// Adds alive-branch counts at each grid point under keys "width:<index>".
void accumulate_width(Accumulator& acc, const Tree& tree, std::span<const double> s_grid);
void accumulate_width(Accumulator& acc, const EventLog& log, std::span<const double> s_grid);
WidthSeries width_from(const Accumulator& acc, std::span<const double> s_grid);

WidthSeries empirical_width(std::span<const Tree> trees, std::span<const double> s_grid);
WidthSeries empirical_width(std::span<const EventLog> logs, std::span<const double> s_grid);

// --- coordination -----------------------------------------------------------

// Complete subtree hanging below a uniformly chosen order-K branch.
std::optional<Tree> random_complete_subtree(const Tree& tree, int K, Rng& rng);

// For each H, compares the census of random order-K complete subtrees of
// order-H trees with direct order-K samples.
Report coordination_test(const HbpSampler& sampler, int K, std::span<const int> H, std::uint64_t n,
                         std::uint64_t seed, double band = 4.0, double min_expected = 50.0);

}  // namespace hortonlab
