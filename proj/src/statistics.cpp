#include "hortonlab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hortonlab/pruning.hpp"

namespace hortonlab {

namespace {

constexpr long double kScale = 1099511627776.0L;  // 2^40

__int128 to_fixed(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("Accumulator: non-finite value");
    return static_cast<__int128>(std::nearbyintl(static_cast<long double>(x) * kScale));
}

double from_fixed(__int128 v) { return static_cast<double>(static_cast<long double>(v) / kScale); }

int order_of(const Tree& t) { return horton_orders(t).tree_order; }

double pow2(int e) { return std::ldexp(1.0, e); }

}  // namespace

Check make_check(std::string name, double observed, double expected, double se, double band) {
    Check c{std::move(name), observed, expected, se, band};
    c.pass = se > 0.0 ? std::abs(observed - expected) <= band * se : std::abs(observed - expected) <= c.tol;
    return c;
}

Check make_exact_check(std::string name, double observed, double expected, double tol) {
    Check c{std::move(name), observed, expected, 0.0, 0.0, tol};
    c.pass = std::abs(observed - expected) <= tol;
    return c;
}

bool Report::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

double Moments::var_x() const {
    if (n < 2) return 0.0;
    return std::max(0.0, (sxx - sx * sx / n) / (n - 1));
}

double Moments::se_x() const { return n ? std::sqrt(var_x() / n) : 0.0; }

double Moments::ratio_se() const {
    if (n < 2 || sx == 0.0) return 0.0;
    const double r = ratio();
    const double dd = std::max(0.0, syy - 2.0 * r * sxy + r * r * sxx);
    return std::sqrt(dd * n / (n - 1)) / std::abs(sx);
}

void Accumulator::add(std::string_view key, double x) {
    auto it = sums_.find(key);
    if (it == sums_.end()) it = sums_.emplace(std::string(key), Exact{}).first;
    auto& e = it->second;
    e.n += 1;
    e.sx += to_fixed(x);
    e.sxx += to_fixed(x * x);
}

void Accumulator::add_pair(std::string_view key, double x, double y) {
    auto it = sums_.find(key);
    if (it == sums_.end()) it = sums_.emplace(std::string(key), Exact{}).first;
    auto& e = it->second;
    e.n += 1;
    e.sx += to_fixed(x);
    e.sy += to_fixed(y);
    e.sxx += to_fixed(x * x);
    e.syy += to_fixed(y * y);
    e.sxy += to_fixed(x * y);
}

void Accumulator::count(std::string_view key, std::int64_t by) {
    auto it = counts_.find(key);
    if (it == counts_.end()) it = counts_.emplace(std::string(key), 0).first;
    it->second += by;
}

void Accumulator::merge(const Accumulator& other) {
    for (const auto& [k, o] : other.sums_) {
        auto& e = sums_[k];
        e.n += o.n;
        e.sx += o.sx;
        e.sy += o.sy;
        e.sxx += o.sxx;
        e.syy += o.syy;
        e.sxy += o.sxy;
    }
    for (const auto& [k, c] : other.counts_) counts_[k] += c;
}

Moments Accumulator::moments(std::string_view key) const {
    auto it = sums_.find(key);
    if (it == sums_.end()) return {};
    const auto& e = it->second;
    return {e.n, from_fixed(e.sx), from_fixed(e.sy), from_fixed(e.sxx), from_fixed(e.syy), from_fixed(e.sxy)};
}

std::int64_t Accumulator::counts(std::string_view key) const {
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
}

std::vector<std::string> Accumulator::moment_keys() const {
    std::vector<std::string> out;
    for (const auto& kv : sums_) out.push_back(kv.first);
    return out;
}

bool Accumulator::operator==(const Accumulator& other) const {
    return sums_ == other.sums_ && counts_ == other.counts_;
}

std::string stat_key(std::string_view base, int i, int j) {
    std::string k(base);
    k += ':';
    k += std::to_string(i);
    if (j >= 0) {
        k += ':';
        k += std::to_string(j);
    }
    return k;
}

void accumulate_tokunaga(Accumulator& acc, const BranchDecomposition& d) {
    acc.count("tok:trees");
    for (int j = 2; j <= d.max_order; ++j)
        for (int i = 1; i < j; ++i)
            acc.add_pair(stat_key("tok", i, j), static_cast<double>(d.count(j)), static_cast<double>(d.side_count(i, j)));
}

TokunagaEstimate tokunaga_from(const Accumulator& acc, int K) {
    TokunagaEstimate e;
    e.K = K;
    e.trees = acc.counts("tok:trees");
    e.t.assign(K + 1, std::vector<double>(K + 1, 0.0));
    e.se = e.t;
    e.nij_total.assign(K + 1, std::vector<std::int64_t>(K + 1, 0));
    e.nj_total.assign(K + 1, 0);
    for (int j = 2; j <= K; ++j)
        for (int i = 1; i < j; ++i) {
            const auto m = acc.moments(stat_key("tok", i, j));
            e.t[i][j] = m.ratio();
            e.se[i][j] = m.ratio_se();
            e.nij_total[i][j] = std::llround(m.sy);
            e.nj_total[j] = std::llround(m.sx);
        }
    return e;
}

TokunagaEstimate estimate_tokunaga(std::span<const Tree> trees) {
    if (trees.empty()) throw std::invalid_argument("estimate_tokunaga: empty sample");
    Accumulator acc;
    int K = 0;
    for (const auto& t : trees) {
        const auto h = horton_orders(t);
        if (K == 0) K = h.tree_order;
        if (h.tree_order != K) throw std::invalid_argument("estimate_tokunaga: mixed orders in sample");
        if (K < 2) throw std::invalid_argument("estimate_tokunaga: order must be at least 2");
        accumulate_tokunaga(acc, branch_decompose(t, h));
    }
    return tokunaga_from(acc, K);
}

TokunagaEstimate estimate_tokunaga_pooled(std::span<const Tree> trees) {
    if (trees.empty()) throw std::invalid_argument("estimate_tokunaga: empty sample");
    Accumulator acc;
    int K = 0;
    for (const auto& t : trees) {
        const auto h = horton_orders(t);
        K = std::max(K, h.tree_order);
        accumulate_tokunaga(acc, branch_decompose(t, h));
    }
    return tokunaga_from(acc, K);
}

HortonStats horton_stats(std::span<const Tree> trees) {
    if (trees.empty()) throw std::invalid_argument("horton_stats: empty sample");
    HortonStats s;
    std::vector<double> sums;
    for (const auto& t : trees) {
        const auto h = horton_orders(t);
        if (s.K == 0) {
            s.K = h.tree_order;
            sums.assign(s.K + 1, 0.0);
        }
        if (h.tree_order != s.K) throw std::invalid_argument("horton_stats: mixed orders in sample");
        const auto d = branch_decompose(t, h);
        if (d.count(s.K) != 1) throw std::logic_error("horton_stats: more than one top-order branch");
        for (int k = 1; k <= s.K; ++k) sums[k] += static_cast<double>(d.count(k));
    }
    const double n = static_cast<double>(trees.size());
    s.mean_counts.assign(s.K + 1, 0.0);
    s.ratios.assign(s.K + 1, 0.0);
    for (int k = 1; k <= s.K; ++k) {
        s.mean_counts[k] = sums[k] / n;
        s.ratios[k] = s.mean_counts[k] / s.mean_counts[1];
    }
    if (s.K >= 2) {
        double mk = 0, my = 0;
        for (int k = 1; k <= s.K; ++k) {
            mk += k;
            my += std::log(s.mean_counts[k]);
        }
        mk /= s.K;
        my /= s.K;
        double num = 0, den = 0;
        for (int k = 1; k <= s.K; ++k) {
            num += (k - mk) * (std::log(s.mean_counts[k]) - my);
            den += (k - mk) * (k - mk);
        }
        s.R = std::exp(-num / den);
    }
    return s;
}

OrderFit order_distribution_test(std::span<const int> orders, std::optional<double> target_p, double band,
                                 double min_expected) {
    if (orders.empty()) throw std::invalid_argument("order_distribution_test: empty sample");
    OrderFit f;
    f.report.name = "orders";
    const double N = static_cast<double>(orders.size());
    int kmax = 0;
    double ksum = 0.0;
    for (int k : orders) {
        if (k < 1) throw std::invalid_argument("order_distribution_test: orders must be positive");
        kmax = std::max(kmax, k);
        ksum += k;
    }
    std::vector<double> counts(kmax + 1, 0.0);
    for (int k : orders) counts[k] += 1.0;
    f.p_hat.assign(kmax + 1, 0.0);
    for (int k = 1; k <= kmax; ++k) f.p_hat[k] = counts[k] / N;
    f.p_mle = N / ksum;
    const double p = target_p.value_or(f.p_mle);
    double tail_obs = N, tail_exp = 1.0;
    for (int k = 1;; ++k) {
        const double pk = p * std::pow(1.0 - p, k - 1);
        if (N * pk < min_expected) break;
        const double obs = k <= kmax ? counts[k] : 0.0;
        f.chi2 += (obs - N * pk) * (obs - N * pk) / (N * pk);
        f.bins += 1;
        f.report.add(make_check("p_" + std::to_string(k), obs / N, pk, std::sqrt(pk * (1.0 - pk) / N), band));
        tail_obs -= obs;
        tail_exp -= pk;
        if (pk >= 1.0) break;
    }
    tail_exp = std::max(0.0, tail_exp);
    if (N * tail_exp >= min_expected) {
        f.chi2 += (tail_obs - N * tail_exp) * (tail_obs - N * tail_exp) / (N * tail_exp);
        f.bins += 1;
        f.report.add(make_check("tail", tail_obs / N, tail_exp, std::sqrt(tail_exp * (1.0 - tail_exp) / N), band));
    } else if (tail_obs > 0 && tail_exp == 0.0) {
        f.report.add(make_exact_check("tail", tail_obs / N, 0.0, 0.0));
    }
    return f;
}

OrderFit order_distribution_test(std::span<const Tree> trees, std::optional<double> target_p, double band,
                                 double min_expected) {
    std::vector<int> orders;
    orders.reserve(trees.size());
    for (const auto& t : trees) orders.push_back(order_of(t));
    return order_distribution_test(orders, target_p, band, min_expected);
}

std::string census_key(const Tree& tree, int max_leaves) {
    const int leaves = tree.leaf_count();
    if (leaves <= max_leaves) return canonical_shape(tree);
    return "K=" + std::to_string(order_of(tree)) + ",N1=" + std::to_string(leaves);
}

CensusComparison compare_census(const Census& a, const Census& b, double band, double min_expected) {
    CensusComparison out;
    out.report.name = "census";
    double na = 0, nb = 0;
    for (const auto& kv : a) na += static_cast<double>(kv.second);
    for (const auto& kv : b) nb += static_cast<double>(kv.second);
    if (na == 0 || nb == 0) throw std::invalid_argument("compare_census: empty census");
    std::map<std::string, std::pair<double, double>> bins;
    for (const auto& [k, c] : a) bins[k].first = static_cast<double>(c);
    for (const auto& [k, c] : b) bins[k].second = static_cast<double>(c);
    for (const auto& [k, xy] : bins) {
        const double p = (xy.first + xy.second) / (na + nb);
        if (std::min(na, nb) * p < min_expected) continue;
        const double se = std::sqrt(p * (1.0 - p) * (1.0 / na + 1.0 / nb));
        const double diff = xy.first / na - xy.second / nb;
        out.report.add(make_check(k, diff, 0.0, se, band));
        if (se > 0) out.chi2 += diff * diff / (se * se);
        out.bins_tested += 1;
    }
    if (out.bins_tested == 0) out.report.notes.push_back("no bin reached the expected-count threshold");
    return out;
}

CensusComparison prune_invariance_test(const TreeSampler& sampler, std::uint64_t seed, std::uint64_t n, double band,
                                       double min_expected) {
    if (n < 1) throw std::invalid_argument("prune_invariance_test: n must be positive");
    Census original, pruned;
    for (std::uint64_t i = 0; i < n; ++i) {
        Rng rng = make_stream(seed, i);
        const Tree t = sampler(rng);
        if (i % 2 == 0) {
            original[census_key(t)] += 1;
        } else {
            const Tree p = prune(t).pruned;
            if (!p.is_empty()) pruned[census_key(p)] += 1;
        }
    }
    if (pruned.empty()) throw std::invalid_argument("prune_invariance_test: every pruned tree is empty");
    auto out = compare_census(original, pruned, band, min_expected);
    out.report.name = "prune-invariance";
    return out;
}

void accumulate_side_branches(Accumulator& acc, const Tree& tree, const BranchDecomposition& d) {
    std::vector<int> per_order(d.max_order + 1);
    for (std::size_t b = 0; b < d.branches.size(); ++b) {
        const auto& br = d.branches[b];
        const int j = br.order;
        const auto sides = d.branch_sides(static_cast<int>(b));
        const int m = static_cast<int>(sides.size());
        acc.add(stat_key("side:m", j), m);
        acc.add(stat_key("side:m0", j), m == 0 ? 1.0 : 0.0);
        std::fill(per_order.begin(), per_order.end(), 0);
        for (const auto& s : sides) {
            per_order[s.order] += 1;
            if (m >= 2) acc.add(stat_key("side:pos", s.order, j), (s.position - 1.0) / (m - 1.0));
        }
        for (int i = 1; i < j; ++i) acc.add(stat_key("side:mi", i, j), per_order[i]);
        if (tree.has_lengths())
            for (int v : d.branch_edges(static_cast<int>(b))) acc.add(stat_key("side:len", j), tree.length[v]);
    }
}

Report side_branch_report(const Accumulator& acc, const ProcessParams& params, int max_order, double band,
                          std::int64_t min_branches) {
    Report r;
    r.name = "side-branches";
    for (int j = 1; j <= max_order; ++j) {
        const auto m = acc.moments(stat_key("side:m", j));
        if (m.n < min_branches) {
            r.notes.push_back("order " + std::to_string(j) + ": " + std::to_string(m.n) + " branches, skipped");
            continue;
        }
        double S = 1.0;
        for (int i = 1; i < j; ++i) S += params.tokunaga(i);
        const std::string tag = "j=" + std::to_string(j);
        if (S == 1.0) {
            r.add(make_exact_check(tag + " m", m.mean_x(), 0.0, 0.0));
        } else {
            r.add(make_check(tag + " mean m", m.mean_x(), S - 1.0, m.se_x(), band));
            const auto z = acc.moments(stat_key("side:m0", j));
            r.add(make_check(tag + " P(m=0)", z.mean_x(), 1.0 / S, std::sqrt((1.0 / S) * (1.0 - 1.0 / S) / z.n), band));
            for (int i = 1; i < j; ++i) {
                const auto mi = acc.moments(stat_key("side:mi", i, j));
                r.add(make_check(tag + " mean m_" + std::to_string(i), mi.mean_x(), params.tokunaga(j - i), mi.se_x(), band));
                const auto pos = acc.moments(stat_key("side:pos", i, j));
                if (pos.n >= min_branches)
                    r.add(make_check(tag + " position of order " + std::to_string(i), pos.mean_x(), 0.5, pos.se_x(), band));
            }
        }
        const auto len = acc.moments(stat_key("side:len", j));
        if (len.n >= min_branches)
            r.add(make_check(tag + " edge mean", len.mean_x(), 1.0 / (params.rates(j) * S), len.se_x(), band));
    }
    return r;
}

Report side_branch_test(std::span<const Tree> trees, const ProcessParams& params, double band) {
    if (trees.empty()) throw std::invalid_argument("side_branch_test: empty sample");
    Accumulator acc;
    int K = 0;
    for (const auto& t : trees) {
        const auto h = horton_orders(t);
        K = std::max(K, h.tree_order);
        accumulate_side_branches(acc, t, branch_decompose(t, h));
    }
    return side_branch_report(acc, params, K, band);
}

std::optional<std::pair<int, int>> principal_orders(const Tree& tree, const HortonOrderAssignment& h, Rng& rng) {
    if (h.tree_order < 2) return std::nullopt;
    const auto c = tree.child[tree.stem()];
    std::pair<int, int> out{h.order[c[0]], h.order[c[1]]};
    if (std::bernoulli_distribution(0.5)(rng)) std::swap(out.first, out.second);
    return out;
}

double principal_joint_law(const TokunagaRule& rule, double p, int a, int b, int kmax) {
    if (a < 1 || b < 1) return 0.0;
    const int k = a == b ? a + 1 : std::max(a, b);
    if (k > kmax) return 0.0;
    double S = 1.0;
    for (int i = 1; i < k; ++i) S += rule(i);
    const double z = kmax >= (1 << 20) ? 1.0 : 1.0 - std::pow(1.0 - p, kmax - 1);
    const double pk = p * std::pow(1.0 - p, k - 2) / z;
    if (a == b) return pk / S;
    return pk * rule(k - std::min(a, b)) / S / 2.0;
}

PrincipalStats principal_subtree_stats(std::span<const std::pair<int, int>> pairs, const TokunagaRule& rule, double p,
                                       int kmax, double band, int max_cell) {
    PrincipalStats s;
    s.report.name = "principal-subtrees";
    s.n = static_cast<std::int64_t>(pairs.size());
    if (s.n == 0) throw std::invalid_argument("principal_subtree_stats: no trees of order >= 2");
    std::map<int, std::int64_t> ma, mb;
    for (const auto& [a, b] : pairs) {
        s.joint[{a, b}] += 1;
        ma[a] += 1;
        mb[b] += 1;
    }
    const double n = static_cast<double>(s.n);
    auto marginal_law = [&](int m) {
        double q = 0.0;
        for (int b = 1; b <= kmax; ++b) q += principal_joint_law(rule, p, m, b, kmax);
        return q;
    };
    auto prop_se = [n](double q) { return std::sqrt(q * (1.0 - q) / n); };
    for (int m = 1; m < kmax; ++m) {
        const double q = marginal_law(m);
        if (n * q < 50.0) break;
        s.report.add(make_check("P(K_a=" + std::to_string(m) + ")", ma[m] / n, q, prop_se(q), band));
        s.report.add(make_check("P(K_b=" + std::to_string(m) + ")", mb[m] / n, q, prop_se(q), band));
    }
    for (int a = 1; a <= max_cell; ++a)
        for (int b = 1; b <= max_cell; ++b) {
            const double q = principal_joint_law(rule, p, a, b, kmax);
            if (n * q < 50.0) continue;
            const auto it = s.joint.find({a, b});
            const double obs = it == s.joint.end() ? 0.0 : it->second / n;
            const std::string cell = "(" + std::to_string(a) + "," + std::to_string(b) + ")";
            s.report.add(make_check("P" + cell, obs, q, prop_se(q), band));
        }
    return s;
}

PrincipalStats principal_subtree_stats(std::span<const Tree> trees, std::uint64_t seed, const TokunagaRule& rule,
                                       double p, int kmax, double band, int max_cell) {
    Rng rng(seed);
    std::vector<std::pair<int, int>> pairs;
    for (const auto& t : trees)
        if (auto o = principal_orders(t, horton_orders(t), rng)) pairs.push_back(*o);
    return principal_subtree_stats(pairs, rule, p, kmax, band, max_cell);
}

std::vector<std::int64_t> vertex_order_counts(const Tree& tree, const HortonOrderAssignment& h) {
    std::vector<std::int64_t> v(h.tree_order + 1, 0);
    for (int x = 1; x < tree.size(); ++x) v[h.order[x]] += 1;
    const std::int64_t total = tree.size() - 1;
    if (total > 0 && total != 2 * v[1] - 1) throw std::logic_error("vertex counts violate V = 2 V_1 - 1");
    return v;
}

std::vector<double> expected_vertex_counts(const TokunagaRule& rule, int K) {
    if (K < 1) throw std::invalid_argument("expected_vertex_counts: K must be positive");
    std::vector<double> N(K + 1, 0.0), V(K + 1, 0.0);
    N[K] = 1.0;
    for (int k = K - 1; k >= 1; --k) {
        N[k] = 2.0 * N[k + 1];
        for (int j = k + 1; j <= K; ++j) N[k] += rule(j - k) * N[j];
    }
    for (int k = 1; k <= K; ++k) {
        double S = 1.0;
        for (int i = 1; i < k; ++i) S += rule(i);
        V[k] = N[k] * S;
    }
    return V;
}

Report vertex_order_frequencies(std::span<const Tree> trees, const std::optional<TokunagaRule>& rule, double band) {
    if (trees.empty()) throw std::invalid_argument("vertex_order_frequencies: empty sample");
    Report r;
    r.name = "vertex-orders";
    Accumulator acc;
    int K = 0;
    std::int64_t identity_violations = 0;
    for (const auto& t : trees) {
        const auto h = horton_orders(t);
        if (K == 0) K = h.tree_order;
        if (h.tree_order != K) throw std::invalid_argument("vertex_order_frequencies: mixed orders in sample");
        const auto v = vertex_order_counts(t, h);
        const double total = static_cast<double>(t.size() - 1);
        if (t.size() - 1 != 2 * v[1] - 1) ++identity_violations;
        for (int k = 1; k <= K; ++k) {
            acc.add_pair(stat_key("v1", k), static_cast<double>(v[1]), static_cast<double>(v[k]));
            acc.add_pair(stat_key("vall", k), total, static_cast<double>(v[k]));
        }
    }
    std::vector<double> ev;
    double ev_total = 0.0;
    if (rule) {
        ev = expected_vertex_counts(*rule, K);
        for (int k = 1; k <= K; ++k) ev_total += ev[k];
    }
    r.add(make_exact_check("trees violating V = 2 V_1 - 1", static_cast<double>(identity_violations), 0.0, 0.0));
    // the limits 2^{1-k} and 2^{-k} carry a finite-K bias that grows with k
    const int limit_orders = K - kVertexLimitMargin;
    for (int k = 2; k <= K; ++k) {
        const auto m = acc.moments(stat_key("v1", k));
        const std::string tag = "k=" + std::to_string(k);
        if (k <= limit_orders) r.add(make_check(tag + " V_k/V_1", m.ratio(), pow2(1 - k), m.ratio_se(), band));
        if (rule) r.add(make_check(tag + " V_k/V_1 finite K", m.ratio(), ev[k] / ev[1], m.ratio_se(), band));
    }
    for (int k = 1; k <= K; ++k) {
        const auto m = acc.moments(stat_key("vall", k));
        const std::string tag = "k=" + std::to_string(k);
        // V_1/V = V_1/(2V_1 - 1) is nearly deterministic; the identity above covers it
        if (k >= 2 && k <= limit_orders) r.add(make_check(tag + " vertex fraction", m.ratio(), pow2(-k), m.ratio_se(), band));
        if (rule) r.add(make_check(tag + " vertex fraction finite K", m.ratio(), ev[k] / ev_total, m.ratio_se(), band));
    }
    if (limit_orders < K)
        r.notes.push_back("orders above " + std::to_string(std::max(limit_orders, 0)) + " compared with finite-K means only");
    return r;
}

std::vector<int> uniform_point_orders(const Tree& tree, const HortonOrderAssignment& h, int count, Rng& rng) {
    if (!tree.has_lengths()) throw std::invalid_argument("uniform_point_order: tree has no lengths");
    double total = 0.0;
    for (int v = 1; v < tree.size(); ++v) total += tree.length[v];
    if (!(total > 0.0)) throw std::invalid_argument("uniform_point_order: zero total length");
    std::vector<double> u(count);
    std::uniform_real_distribution<double> unif(0.0, total);
    for (auto& x : u) x = unif(rng);
    std::vector<int> idx(count);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return u[a] < u[b]; });
    std::vector<int> out(count, h.tree_order);
    double acc = 0.0;
    int v = 1;
    for (int i : idx) {
        while (v < tree.size() && acc + tree.length[v] <= u[i]) acc += tree.length[v++];
        if (v >= tree.size()) v = tree.size() - 1;
        out[i] = h.order[v];
    }
    return out;
}

int uniform_point_order(const Tree& tree, const HortonOrderAssignment& h, Rng& rng) {
    return uniform_point_orders(tree, h, 1, rng)[0];
}

int uniform_point_order(const Tree& tree, std::uint64_t seed) {
    Rng rng(seed);
    return uniform_point_order(tree, horton_orders(tree), rng);
}

namespace {

void check_grid(std::span<const double> s_grid) {
    if (s_grid.empty()) throw std::invalid_argument("empirical_width: empty grid");
    if (!std::is_sorted(s_grid.begin(), s_grid.end())) throw std::invalid_argument("empirical_width: grid must be sorted");
}

// Adds 1 to every grid point in [lo, hi).
void mark(std::vector<double>& counts, std::span<const double> s_grid, double lo, double hi) {
    auto a = std::lower_bound(s_grid.begin(), s_grid.end(), lo);
    auto b = std::lower_bound(s_grid.begin(), s_grid.end(), hi);
    for (auto it = a; it < b; ++it) counts[it - s_grid.begin()] += 1.0;
}

}  // namespace

void accumulate_width(Accumulator& acc, const Tree& tree, std::span<const double> s_grid) {
    if (!tree.has_lengths()) throw std::invalid_argument("empirical_width: tree has no lengths");
    check_grid(s_grid);
    std::vector<double> depth(tree.size(), 0.0), counts(s_grid.size(), 0.0);
    for (int v : preorder(tree)) {
        if (v == 0) continue;
        depth[v] = depth[tree.parent[v]] + tree.length[v];
        mark(counts, s_grid, depth[tree.parent[v]], depth[v]);
    }
    for (std::size_t i = 0; i < s_grid.size(); ++i) acc.add(stat_key("width", static_cast<int>(i)), counts[i]);
}

void accumulate_width(Accumulator& acc, const EventLog& log, std::span<const double> s_grid) {
    check_grid(s_grid);
    std::vector<double> counts(s_grid.size(), 0.0);
    for (const auto& b : log.branches) mark(counts, s_grid, b.birth, b.death);
    for (std::size_t i = 0; i < s_grid.size(); ++i) acc.add(stat_key("width", static_cast<int>(i)), counts[i]);
}

WidthSeries width_from(const Accumulator& acc, std::span<const double> s_grid) {
    WidthSeries w;
    w.method = "monte-carlo";
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        const auto m = acc.moments(stat_key("width", static_cast<int>(i)));
        w.s.push_back(s_grid[i]);
        w.c.push_back(m.mean_x());
        w.se.push_back(m.se_x());
    }
    return w;
}

WidthSeries empirical_width(std::span<const Tree> trees, std::span<const double> s_grid) {
    check_grid(s_grid);
    Accumulator acc;
    for (const auto& t : trees) accumulate_width(acc, t, s_grid);
    return width_from(acc, s_grid);
}

WidthSeries empirical_width(std::span<const EventLog> logs, std::span<const double> s_grid) {
    check_grid(s_grid);
    Accumulator acc;
    for (const auto& l : logs) accumulate_width(acc, l, s_grid);
    return width_from(acc, s_grid);
}

std::optional<Tree> random_complete_subtree(const Tree& tree, int K, Rng& rng) {
    const auto h = horton_orders(tree);
    if (h.tree_order < K) return std::nullopt;
    const auto d = branch_decompose(tree, h);
    std::vector<int> tops;
    for (std::size_t b = 0; b < d.branches.size(); ++b)
        if (d.branches[b].order == K) tops.push_back(d.branch_edges(static_cast<int>(b))[0]);
    if (tops.empty()) return std::nullopt;
    const int v = tops[std::uniform_int_distribution<std::size_t>(0, tops.size() - 1)(rng)];
    return subtree(tree, v);
}

Report coordination_test(const HbpSampler& sampler, int K, std::span<const int> H, std::uint64_t n,
                         std::uint64_t seed, double band, double min_expected) {
    Report r;
    r.name = "coordination";
    Census direct;
    for (std::uint64_t i = 0; i < n; ++i) {
        Rng rng = make_stream(seed, i);
        direct[census_key(sampler.sample_order(K, rng))] += 1;
    }
    for (std::size_t hidx = 0; hidx < H.size(); ++hidx) {
        Census sub;
        for (std::uint64_t i = 0; i < n; ++i) {
            Rng rng = make_stream(seed, (hidx + 1) * n + i);
            const Tree t = sampler.sample_order(H[hidx], rng);
            if (auto s = random_complete_subtree(t, K, rng)) sub[census_key(*s)] += 1;
        }
        const auto cmp = compare_census(direct, sub, band, min_expected);
        for (auto c : cmp.report.checks) {
            c.name = "H=" + std::to_string(H[hidx]) + " " + c.name;
            r.add(std::move(c));
        }
    }
    return r;
}

}  // namespace hortonlab
