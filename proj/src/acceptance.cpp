#include "hortonlab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>

#include "hortonlab/campaign.hpp"
#include "hortonlab/hydrodynamics.hpp"
#include "hortonlab/pruning.hpp"
#include "hortonlab/samplers.hpp"
#include "hortonlab/transforms.hpp"

namespace hortonlab {

namespace {

double pow2(int e) { return std::ldexp(1.0, e); }

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::uint64_t scaled(std::uint64_t n, const AcceptanceOptions& o) {
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(static_cast<double>(n) * o.scale)));
}

std::uint64_t criterion_seed(const AcceptanceOptions& o, int id, int part = 0) {
    return stream_seed(o.seed, 1000 * static_cast<std::uint64_t>(id) + static_cast<std::uint64_t>(part));
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Check exact_zero(std::string name, std::int64_t count) { return make_exact_check(std::move(name), static_cast<double>(count), 0.0, 0.0); }

// A check that passes when the estimate is at least `band` standard errors away from `expected`.
Check separation_check(std::string name, double observed, double expected, double se, double band) {
    Check c = make_check(std::move(name), observed, expected, se, band);
    c.pass = se > 0.0 && std::abs(observed - expected) > band * se;
    return c;
}

void append(CriterionResult& r, const Report& rep, const std::string& prefix) {
    for (auto c : rep.checks) {
        c.name = prefix + c.name;
        r.checks.push_back(std::move(c));
    }
    for (const auto& n : rep.notes) r.notes.push_back(prefix + n);
}

// Paired preorder walk of two trees with the same plane shape.
double max_length_gap(const Tree& a, const Tree& b) {
    const auto pa = preorder(a), pb = preorder(b);
    double gap = 0.0;
    for (std::size_t k = 1; k < pa.size(); ++k) gap = std::max(gap, std::abs(a.edge_length(pa[k]) - b.edge_length(pb[k])));
    return gap;
}

// Counts plus a running maximum; merges do not depend on order.
struct Tally {
    Accumulator acc;
    double max_gap = 0.0;
    void merge(const Tally& o) {
        acc.merge(o.acc);
        max_gap = std::max(max_gap, o.max_gap);
    }
};

Census census_with_prefix(const Accumulator& acc, const std::string& prefix) {
    Census c;
    for (const auto& [k, v] : acc.count_table())
        if (k.compare(0, prefix.size(), prefix) == 0) c[k.substr(prefix.size())] += v;
    return c;
}

// --- mixed tree sources -------------------------------------------------------

constexpr int kKinds = 6;
const char* const kKindNames[kKinds] = {"critical c=2", "critical c=3", "event sampler", "random attachment",
                                        "subcritical exp-GW", "walk level set"};

struct MixedSources {
    HbpSampler crit2{CriticalTokunagaParams{2.0, 1.0}.expand()};
    HbpSampler crit3{CriticalTokunagaParams{3.0, 1.0}.expand()};
    HbpSampler selfsim{SelfSimilarParams{0.8, 1.0, 2.0, TokunagaRule::critical(2.0)}.expand()};
};

// Embedded tree with lengths and order at most 8.
Tree mixed_tree(const MixedSources& s, int kind, Rng& rng) {
    Tree t;
    switch (kind) {
        case 0:
            t = s.crit2.sample_order(uniform_int(rng, 1, 8), rng);
            break;
        case 1:
            t = s.crit3.sample_order(uniform_int(rng, 1, 6), rng);
            break;
        case 2:
            do t = s.selfsim.sample_events(rng).tree;
            while (horton_orders(t).tree_order > 8);
            break;
        case 3: {
            const CountLaw laws[] = {CountLaw::poisson, CountLaw::geometric, CountLaw::point};
            const AttachmentLaw law{laws[uniform_int(rng, 0, 2)], TokunagaRule::critical(2.0)};
            t = sample_random_attachment(law, uniform_int(rng, 1, 6), rng);
            std::exponential_distribution<double> len(1.0);
            t.length.assign(t.size(), 0.0);
            for (int v = 1; v < t.size(); ++v) t.length[v] = len(rng);
            break;
        }
        case 4:
            for (;;) {
                try {
                    t = sample_exp_gw(0.2, 1.0, rng, 1 << 16);
                } catch (const CapError&) {
                    continue;
                }
                if (horton_orders(t).tree_order <= 8) break;
            }
            break;
        default:
            for (;;) {
                auto x = sample_walk_excursion({0.5, 1.0, 1.0}, rng, 20000);
                if (!x) continue;
                t = level_set_tree(*x).tree;
                if (horton_orders(t).tree_order <= 8) break;
            }
            break;
    }
    t.embedded = true;
    return t;
}

// --- 1-4: exact structural identities -------------------------------------------

CriterionResult order_equivalence(const AcceptanceOptions& o) {
    CriterionResult r;
    const auto n = scaled(10000, o);
    const MixedSources src;
    const auto seed = criterion_seed(o, 1);
    auto acc = run_indexed(n, o.workers, Accumulator{}, [&](std::uint64_t i, Accumulator& a) {
        Rng rng = make_stream(seed, i);
        const int kind = static_cast<int>(i % kKinds);
        Tree t = mixed_tree(src, kind, rng);
        if (kind % 2 == 0) t = shape(t);
        const int h = horton_orders(t).tree_order;
        a.count(stat_key("order", h));
        if (order_by_pruning(t) != h) a.count("mismatch");
    });
    r.checks.push_back(exact_zero("order mismatches in " + std::to_string(n) + " trees", acc.counts("mismatch")));
    std::string hist = "orders:";
    for (int k = 1; k <= 8; ++k) hist += " " + std::to_string(k) + "=" + std::to_string(acc.counts(stat_key("order", k)));
    r.notes.push_back(hist);
    return r;
}

CriterionResult reciprocity(const AcceptanceOptions& o) {
    CriterionResult r;
    const auto n = scaled(1000, o);
    const MixedSources src;
    const auto seed = criterion_seed(o, 2);
    auto tally = run_indexed(n, o.workers, Tally{}, [&](std::uint64_t i, Tally& a) {
        Rng rng = make_stream(seed, i);
        const Tree t = mixed_tree(src, static_cast<int>(i % kKinds), rng);
        const Tree back = level_set_tree(harris_path(t)).tree;
        if (!plane_equal(back, t, 0.0, false) || back.embedded != t.embedded) {
            a.acc.count("shape");
            return;
        }
        const double gap = max_length_gap(back, t);
        a.max_gap = std::max(a.max_gap, gap);
        if (gap > 1e-12) a.acc.count("length");
    });
    r.checks.push_back(exact_zero("shape or embedding mismatches", tally.acc.counts("shape")));
    r.checks.push_back(exact_zero("length mismatches above 1e-12", tally.acc.counts("length")));
    r.checks.push_back(make_exact_check("max length gap", tally.max_gap, 0.0, 1e-12));
    r.notes.push_back(std::to_string(n) + " trees");
    return r;
}

CriterionResult commutation(const AcceptanceOptions& o) {
    CriterionResult r;
    const auto n = scaled(1000, o);
    const auto seed = criterion_seed(o, 3);
    const WalkParams walks[] = {{0.5, 1.0, 1.0}, {0.4, 1.0, 1.0}, {0.5, 2.0, 1.0}};
    auto tally = run_indexed(n, o.workers, Tally{}, [&](std::uint64_t i, Tally& a) {
        Rng rng = make_stream(seed, i);
        std::optional<Excursion> x;
        while (!(x = sample_walk_excursion(walks[i % 3], rng, 100000))) {
        }
        const auto base = level_set_tree(*x);
        if (base.ties) a.acc.count("ties");
        Excursion y = *x;
        for (int m = 1; m <= 3; ++m) {
            y = local_minima_series(y);
            const Tree lhs = level_set_tree(y).tree;
            const Tree rhs = prune_iter(base.tree, m);
            if (!plane_equal(lhs, rhs, 0.0, false)) {
                a.acc.count(stat_key("shape", m));
                continue;
            }
            const double gap = lhs.is_empty() ? 0.0 : max_length_gap(lhs, rhs);
            a.max_gap = std::max(a.max_gap, gap);
            if (gap > 1e-12) a.acc.count(stat_key("length", m));
        }
    });
    for (int m = 1; m <= 3; ++m) {
        r.checks.push_back(exact_zero("m=" + std::to_string(m) + " structural mismatches", tally.acc.counts(stat_key("shape", m))));
        r.checks.push_back(exact_zero("m=" + std::to_string(m) + " length mismatches above 1e-12", tally.acc.counts(stat_key("length", m))));
    }
    r.checks.push_back(make_exact_check("max merged length gap", tally.max_gap, 0.0, 1e-12));
    r.notes.push_back(std::to_string(n) + " excursions, " + std::to_string(tally.acc.counts("ties")) + " with ties");
    return r;
}

CriterionResult embedding_commutation(const AcceptanceOptions& o) {
    CriterionResult r;
    const auto n = scaled(10000, o);
    const MixedSources src;
    const auto seed = criterion_seed(o, 4);
    auto acc = run_indexed(n, o.workers, Accumulator{}, [&](std::uint64_t i, Accumulator& a) {
        Rng rng = make_stream(seed, i);
        const int kind = static_cast<int>(i % kKinds);
        Tree t = mixed_tree(src, kind, rng);
        if (i % 2 == 1) t = shape(t);
        const Tree lhs = shape(prune(proper_embed(t)).pruned);
        const Tree rhs = shape(proper_embed(prune(t).pruned));
        if (!plane_equal(lhs, rhs)) a.count(stat_key("mismatch", kind));
    });
    std::int64_t bad = 0;
    for (int k = 0; k < kKinds; ++k) {
        const auto c = acc.counts(stat_key("mismatch", k));
        bad += c;
        if (c) r.notes.push_back(std::string(kKindNames[k]) + ": " + std::to_string(c) + " mismatches");
    }
    r.checks.push_back(exact_zero("plane-shape mismatches in " + std::to_string(n) + " trees", bad));
    return r;
}

// --- 5-7: deterministic numerics --------------------------------------------------

CriterionResult horton_exponent_check(const AcceptanceOptions&) {
    CriterionResult r;
    r.checks.push_back(make_exact_check("R(c=2)", horton_exponent(TokunagaRule::critical(2.0)), 4.0, 1e-10));
    r.checks.push_back(make_exact_check("R(c=3)", horton_exponent(TokunagaRule::critical(3.0)), 6.0, 1e-10));
    for (double c : {2.0, 3.0}) {
        const auto rule = TokunagaRule::critical(c);
        double lib = 0.0, summed = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double z = (i + 0.5) / 100.0 * 0.95 / c;
            const double closed = (1.0 - 2.0 * c * z) * (z - 1.0) / (1.0 - c * z);
            double s = -1.0 + 2.0 * z, zk = 1.0;
            for (int k = 1; k < 5000; ++k) {
                zk *= z;
                const double term = zk * (c - 1.0) * std::pow(c, k - 1);
                s += term;
                if (term < 1e-20) break;
            }
            lib = std::max(lib, std::abs(t_hat(z, rule) - closed));
            summed = std::max(summed, std::abs(s - closed));
        }
        const std::string tag = "c=" + fmt(c);
        r.checks.push_back(make_exact_check(tag + " t_hat vs closed form, max over 100 points", lib, 0.0, 1e-12));
        r.checks.push_back(make_exact_check(tag + " partial sums vs closed form, max over 100 points", summed, 0.0, 1e-12));
    }
    return r;
}

CriterionResult criticality_check(const AcceptanceOptions&) {
    CriterionResult r;
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(0.1 * i);

    const auto crit = width_series(1.0 - 2.0 / 4.0, 1.0, 2.0, TokunagaRule::critical(2.0), grid);
    double dev = 0.0;
    for (double c : crit.c) dev = std::max(dev, std::abs(c - 1.0));
    r.checks.push_back(make_exact_check("c=2, p=1-zeta/R: max |C(s)-1| on [0,10]", dev, 0.0, 0.0));
    const auto crit3 = width_series(1.0 - 3.0 / 6.0, 1.0, 3.0, TokunagaRule::critical(3.0), grid);
    double dev3 = 0.0;
    for (double c : crit3.c) dev3 = std::max(dev3, std::abs(c - 1.0));
    r.checks.push_back(make_exact_check("c=3, p=1-zeta/R: max |C(s)-1| on [0,10]", dev3, 0.0, 1e-14));
    if (dev3 != 0.0) r.notes.push_back("c=3 root 1/6 is not a binary fraction, so C(s) carries rounding of " + fmt(dev3));

    // zeta = 1 needs L <= 1: constant Tokunaga sequences T_k = a
    struct Unit {
        double a, p, gamma;
    };
    for (const Unit u : {Unit{0.5, 0.3, 1.0}, Unit{0.5, 0.6, 0.5}, Unit{0.1, 0.8, 1.0}}) {
        const auto rule = TokunagaRule::geometric(u.a, 1.0);
        const double z = 1.0 - u.p;
        const double that = -1.0 + 2.0 * z + u.a * z / (1.0 - z);
        const auto w = width_series(u.p, u.gamma, 1.0, rule, grid);
        double rel = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double e = std::exp(grid[i] * u.gamma * that);
            rel = std::max(rel, std::abs(w.c[i] - e) / std::max(1.0, e));
        }
        r.checks.push_back(make_exact_check("zeta=1, T_k=" + fmt(u.a) + ", p=" + fmt(u.p) + ": max |C-exp|/max(1,exp)", rel, 0.0, 1e-12));
    }

    // T = (1): t_hat(z) = 3z - 1 vanishes at 1/3 = (1-p)/zeta^2 with zeta = 1.5, p = 1/4
    const double zeta = 1.5, p = 0.25;
    std::vector<double> ints;
    for (int i = 0; i <= 10; ++i) ints.push_back(i);
    const auto lin = width_series(p, 1.0, zeta, TokunagaRule::list({1.0}), ints);
    double second = 0.0;
    for (std::size_t i = 0; i + 2 < ints.size(); ++i) second = std::max(second, std::abs(lin.c[i + 2] - 2.0 * lin.c[i + 1] + lin.c[i]));
    r.checks.push_back(make_exact_check("degree-1 regime: max second difference", second, 0.0, 1e-8));
    const double slope = (3.0 * (1.0 - p) / zeta - 1.0) * p / (1.0 - (1.0 - p) / zeta) / zeta;
    r.checks.push_back(make_exact_check("degree-1 regime: slope", lin.c[1] - lin.c[0], slope, 1e-12));
    return r;
}

CriterionResult ode_closed_form(const AcceptanceOptions&) {
    CriterionResult r;
    constexpr int K = 5;
    const auto rule = TokunagaRule::critical(2.0);
    RateRule unit;
    unit.head.assign(K, 1.0);
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(0.1 * i);
    const auto ode = ode_solve(explicit_spec(rule, unit, {0, 0, 0, 0, 1}, K), grid, 1e-12);
    const auto series = width_closed_form_unit_rates(rule, K, grid);

    // x(s) = exp(s(N - I)) e_K with N[i][j] = T_{j-i} + 2 [j = i+1]; N is nilpotent.
    using Mat = std::array<std::array<double, K>, K>;
    Mat N{};
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j) N[i][j] = rule(j - i) + (j == i + 1 ? 2.0 : 0.0);
    std::vector<std::array<double, K>> powers{{0, 0, 0, 0, 1}};
    for (int n = 1; n < K; ++n) {
        std::array<double, K> next{};
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j) next[i] += N[i][j] * powers.back()[j];
        powers.push_back(next);
    }
    double ode_gap = 0.0, series_gap = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double s = grid[g];
        for (int i = 0; i < K; ++i) {
            double x = 0.0, f = 1.0;
            for (int n = 0; n < K; ++n) {
                if (n > 0) f *= s / n;
                x += f * powers[n][i];
            }
            x *= std::exp(-s);
            ode_gap = std::max(ode_gap, std::abs(ode.x[g][i] - x));
            series_gap = std::max(series_gap, std::abs(series.x[g][i] - x));
        }
    }
    r.checks.push_back(make_exact_check("ode vs matrix exponential, max over components and s in [0,5]", ode_gap, 0.0, 1e-8));
    r.checks.push_back(make_exact_check("convolution form vs matrix exponential", series_gap, 0.0, 1e-12));
    return r;
}

// --- 8-13: statistical laws --------------------------------------------------------

CriterionResult gw_equivalence(const AcceptanceOptions& o) {
    CriterionResult r;
    const auto n = scaled(100000, o);
    constexpr int kBuilt = 10, kTok = 6, kShapeLeaves = 12;
    const HbpSampler s(CriticalTokunagaParams{2.0, 1.0}.expand());
    const auto seed = criterion_seed(o, 8);
    auto acc = run_indexed(n, o.workers, Accumulator{}, [&](std::uint64_t i, Accumulator& a) {
        Rng rng = make_stream(seed, i);
        const int K = s.draw_order(rng);
        if (K > kBuilt) {
            a.count("over");
            a.count("hbp:other");
            return;
        }
        const Tree t = s.sample_order(K, rng);
        const auto h = horton_orders(t);
        if (h.tree_order != K) a.count("order mismatch");
        a.count(stat_key("order", h.tree_order));
        accumulate_tokunaga(a, branch_decompose(t, h));
        double len = 0.0;
        for (int v = 1; v < t.size(); ++v) len += t.length[v];
        a.add_pair("edge", t.size() - 1.0, len);
        a.count("hbp:" + (t.leaf_count() <= kShapeLeaves ? canonical_shape(t) : std::string("other")));
    });
    const auto gw_seed = criterion_seed(o, 8, 1);
    auto gw = run_indexed(n, o.workers, Accumulator{}, [&](std::uint64_t i, Accumulator& a) {
        Rng rng = make_stream(gw_seed, i);
        try {
            a.count("gw:" + canonical_shape(sample_exp_gw(0.0, 1.0, rng, 2 * kShapeLeaves)));
        } catch (const CapError&) {
            a.count("gw:other");
        }
    });

    const double N = static_cast<double>(n);
    r.checks.push_back(exact_zero("built trees whose order differs from the drawn order", acc.counts("order mismatch")));
    for (int K = 1; K <= kBuilt; ++K) {
        const double q = pow2(-K);
        r.checks.push_back(make_check("p_" + std::to_string(K), acc.counts(stat_key("order", K)) / N, q, std::sqrt(q * (1 - q) / N)));
    }
    const double tail = pow2(-kBuilt);
    r.checks.push_back(make_check("P(K>" + std::to_string(kBuilt) + ")", acc.counts("over") / N, tail, std::sqrt(tail * (1 - tail) / N)));
    const auto tok = tokunaga_from(acc, kTok);
    for (int j = 2; j <= kTok; ++j)
        for (int i = 1; i < j; ++i)
            r.checks.push_back(make_check("T_" + std::to_string(i) + "," + std::to_string(j), tok.t[i][j], pow2(j - i - 1), tok.se[i][j]));
    const auto edge = acc.moments("edge");
    r.checks.push_back(make_check("pooled edge mean", edge.ratio(), 0.5, edge.ratio_se()));
    const auto cmp = compare_census(census_with_prefix(acc, "hbp:"), census_with_prefix(gw, "gw:"));
    append(r, cmp.report, "shape vs exp-GW(0,1) ");
    r.notes.push_back("trees of order > " + std::to_string(kBuilt) + " are drawn but not built: " + std::to_string(acc.counts("over")));
    r.notes.push_back(std::to_string(cmp.bins_tested) + " shape bins tested against direct Galton-Watson samples");
    return r;
}

CriterionResult cross_sampler(const AcceptanceOptions& o) {
    CriterionResult r;
    const auto n = scaled(20000, o);
    const HbpSampler s(SelfSimilarParams{0.8, 1.0, 2.0, TokunagaRule::critical(2.0)}.expand());
    auto census = [&](const Tree& t, const std::string& tag, Accumulator& a) {
        const auto h = horton_orders(t);
        const auto d = branch_decompose(t, h);
        a.count(tag + "order:" + std::to_string(h.tree_order));
        a.count(tag + "joint:N1=" + std::to_string(d.count(1)) + ",N2=" + std::to_string(d.count(2)));
    };
    const auto seed_a = criterion_seed(o, 9), seed_b = criterion_seed(o, 9, 1);
    auto acc = run_indexed(n, o.workers, Accumulator{}, [&](std::uint64_t i, Accumulator& a) {
        Rng ra = make_stream(seed_a, i), rb = make_stream(seed_b, i);
        census(s.sample(ra), "direct:", a);
        census(s.sample_events(rb).tree, "events:", a);
    });
    const auto orders = compare_census(census_with_prefix(acc, "direct:order:"), census_with_prefix(acc, "events:order:"));
    const auto joint = compare_census(census_with_prefix(acc, "direct:joint:"), census_with_prefix(acc, "events:joint:"));
    append(r, orders.report, "order K=");
    append(r, joint.report, "");
    r.notes.push_back(std::to_string(orders.bins_tested) + " order bins and " + std::to_string(joint.bins_tested) +
                      " (N1,N2) bins with at least 50 expected counts");
    return r;
}

CriterionResult prune_invariance(const AcceptanceOptions& o) {
    CriterionResult r;
    const auto n = scaled(50000, o);
    const HbpSampler s(SelfSimilarParams{0.8, 1.0, 2.0, TokunagaRule::critical(2.0)}.expand());
    const auto pos = prune_invariance_test([&](Rng& rng) { return s.sample(rng); }, criterion_seed(o, 10), n);
    append(r, pos.report, "self-similar hbp ");
    const auto neg = prune_invariance_test([](Rng& rng) { return sample_gw_shape(0.7, rng); }, criterion_seed(o, 10, 1), n);
    double worst = 0.0;
    for (const auto& c : neg.report.checks) worst = std::max(worst, std::abs(c.observed - c.expected) / c.se);
    Check rejected{"GW(0.7) rejected: max |z| over " + std::to_string(neg.bins_tested) + " bins", worst, 4.0, 0.0, 4.0};
    rejected.pass = !neg.report.pass();
    r.checks.push_back(rejected);
    r.notes.push_back("hbp: " + std::to_string(pos.bins_tested) + " bins, chi2 " + fmt(pos.chi2) + "; GW(0.7): chi2 " + fmt(neg.chi2));
    return r;
}

CriterionResult width_function(const AcceptanceOptions& o) {
    CriterionResult r;
    const auto n = scaled(100000, o);
    const std::vector<double> grid{0.25, 0.5, 1.0, 2.0};
    const double horizon = grid.back();
    auto run = [&](const HbpSampler& s, std::uint64_t seed) {
        return width_from(run_indexed(n, o.workers, Accumulator{}, [&](std::uint64_t i, Accumulator& a) {
            Rng rng = make_stream(seed, i);
            accumulate_width(a, s.sample_events(rng, horizon).log, grid);
        }), grid);
    };
    const auto crit = run(HbpSampler(CriticalTokunagaParams{2.0, 1.0}.expand()), criterion_seed(o, 11));
    for (std::size_t i = 0; i < grid.size(); ++i)
        r.checks.push_back(make_check("critical C(" + fmt(grid[i]) + ")", crit.c[i], 1.0, crit.se[i], 3.0));

    const double p = 0.4, gamma = 4.0, zeta = 2.0;
    const auto rule = TokunagaRule::critical(2.0);
    const auto sup = run(HbpSampler(SelfSimilarParams{p, gamma, zeta, rule}.expand()), criterion_seed(o, 11, 1));
    const auto series = width_series(p, gamma, zeta, rule, grid);
    const auto ode = ode_solve(geometric_spec(rule, RateRule::geometric(gamma, zeta), p, 1e-14), grid, 1e-12);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        r.checks.push_back(make_check("supercritical C(" + fmt(grid[i]) + ")", sup.c[i], series.c[i], sup.se[i], 3.0));
        r.checks.push_back(make_exact_check("series vs ode at s=" + fmt(grid[i]), series.c[i], ode.total(i + 0), 1e-8));
    }
    r.notes.push_back("event sampler censored at s=" + fmt(horizon) + "; supercritical p=0.4, gamma=4, zeta=2, c=2");
    return r;
}

// E V_k[K] / E V_1[K] through E N_k[K] and mean branch sizes.
std::vector<double> vertex_ratio_oracle(double c, int K) {
    auto T = [c](int k) { return (c - 1.0) * std::pow(c, k - 1); };
    std::vector<double> N(K + 1, 0.0), out(K + 1, 0.0);
    N[K] = 1.0;
    for (int k = K - 1; k >= 1; --k) {
        N[k] = 2.0 * N[k + 1];
        for (int j = k + 1; j <= K; ++j) N[k] += T(j - k) * N[j];
    }
    for (int k = 1; k <= K; ++k) out[k] = N[k] * std::pow(c, k - 1);  // 1 + T_1 + ... + T_{k-1} = c^{k-1}
    const double v1 = out[1];
    for (auto& v : out) v /= v1;
    return out;
}

CriterionResult combinatorial_laws(const AcceptanceOptions& o) {
    CriterionResult r;
    struct Setting {
        double c;
        std::uint64_t n;
        int kmax;
    };
    for (const Setting st : {Setting{2.0, 100000, 10}, Setting{3.0, 40000, 8}}) {
        const auto n = scaled(st.n, o);
        const HbpSampler s(CriticalTokunagaParams{st.c, 1.0}.expand());
        const auto seed = criterion_seed(o, 12, static_cast<int>(st.c));
        auto acc = run_indexed(n, o.workers, Accumulator{}, [&](std::uint64_t i, Accumulator& a) {
            Rng rng = make_stream(seed, i);
            const int K = s.draw_order(rng);
            if (K < 2) return;
            if (K > st.kmax) {
                a.count("over");
                return;
            }
            const Tree t = s.sample_order(K, rng);
            const auto h = horton_orders(t);
            if (h.tree_order != K) a.count("order mismatch");
            const auto pr = principal_orders(t, h, rng);
            a.count(stat_key("pair", pr->first, pr->second));
        });
        std::vector<std::pair<int, int>> pairs;
        for (int x = 1; x <= st.kmax; ++x)
            for (int y = 1; y <= st.kmax; ++y)
                pairs.insert(pairs.end(), static_cast<std::size_t>(acc.counts(stat_key("pair", x, y))), {x, y});
        const std::string tag = "c=" + fmt(st.c) + " ";
        r.checks.push_back(exact_zero(tag + "order mismatches", acc.counts("order mismatch")));
        const auto rule = TokunagaRule::critical(st.c);
        const auto exact = principal_subtree_stats(pairs, rule, 0.5, st.kmax);
        append(r, exact.report, tag + "truncated law ");
        const double m_n = static_cast<double>(pairs.size());
        std::vector<double> ma(st.kmax + 1, 0.0), mb(st.kmax + 1, 0.0);
        for (const auto& [x, y] : pairs) ma[x] += 1.0, mb[y] += 1.0;
        for (int m = 1; m <= st.kmax - 3; ++m) {
            const double q = pow2(-m), se = std::sqrt(q * (1 - q) / m_n);
            if (m_n * q < 50.0) break;
            r.checks.push_back(make_check(tag + "P(K_a=" + std::to_string(m) + ") vs 2^-m", ma[m] / m_n, q, se));
            r.checks.push_back(make_check(tag + "P(K_b=" + std::to_string(m) + ") vs 2^-m", mb[m] / m_n, q, se));
        }
        auto cell = [&](int x, int y) { return acc.counts(stat_key("pair", x, y)) / m_n; };
        if (st.c == 2.0) {
            for (int x = 1; x <= 3; ++x)
                for (int y = 1; y <= 3; ++y) {
                    const double q = pow2(-x - y);
                    r.checks.push_back(make_check(tag + "independence (" + std::to_string(x) + "," + std::to_string(y) + ")",
                                                  cell(x, y), q, std::sqrt(q * (1 - q) / m_n)));
                }
        } else {
            const double q = 1.0 / 6.0, se = std::sqrt(q * (1 - q) / m_n);
            r.checks.push_back(make_check(tag + "(1,1) cell vs 1/6", cell(1, 1), q, se));
            r.checks.push_back(separation_check(tag + "(1,1) cell separated from 1/4", cell(1, 1), 0.25, se, 4.0));
        }
        r.notes.push_back(tag + std::to_string(pairs.size()) + " trees with 2 <= K <= " + std::to_string(st.kmax) + ", " +
                          std::to_string(acc.counts("over")) + " above");
    }

    // vertex orders and uniform points at K = 10, c = 2
    constexpr int K = 10, kPoints = 16, kLimitOrders = K - 4;
    const auto nt = scaled(400, o);
    const HbpSampler s(CriticalTokunagaParams{2.0, 1.0}.expand());
    const auto seed = criterion_seed(o, 12, 9);
    auto acc = run_indexed(nt, o.workers, Accumulator{}, [&](std::uint64_t i, Accumulator& a) {
        Rng rng = make_stream(seed, i);
        const Tree t = s.sample_order(K, rng);
        const auto h = horton_orders(t);
        const auto v = vertex_order_counts(t, h);
        const double total = t.size() - 1.0;
        if (t.size() - 1 != 2 * v[1] - 1) a.count("identity");
        std::vector<int> hits(K + 1, 0);
        for (int k : uniform_point_orders(t, h, kPoints, rng)) hits[k] += 1;
        for (int k = 1; k <= K; ++k) {
            a.add_pair(stat_key("v1", k), static_cast<double>(v[1]), static_cast<double>(v[k]));
            a.add_pair(stat_key("pt", k), kPoints, hits[k]);
            a.add(stat_key("ptdiff", k), hits[k] / static_cast<double>(kPoints) - v[k] / total);
            a.add(stat_key("vshare", k), v[k] / total);
        }
    });
    r.checks.push_back(exact_zero("K=10 trees violating V = 2 V_1 - 1", acc.counts("identity")));
    const auto oracle = vertex_ratio_oracle(2.0, K);
    for (int k = 2; k <= K; ++k) {
        const auto m = acc.moments(stat_key("v1", k));
        const std::string tag = "K=10 V_" + std::to_string(k) + "/V_1";
        if (k <= kLimitOrders) r.checks.push_back(make_check(tag + " vs 2^(1-k)", m.ratio(), pow2(1 - k), m.ratio_se()));
        r.checks.push_back(make_check(tag + " vs finite-K mean", m.ratio(), oracle[k], m.ratio_se()));
    }
    for (int k = 1; k <= K; ++k) {
        const auto m = acc.moments(stat_key("pt", k));
        const std::string tag = "K=10 uniform point order " + std::to_string(k);
        if (k <= kLimitOrders) r.checks.push_back(make_check(tag + " vs 2^-k", m.ratio(), pow2(-k), m.ratio_se()));
        // the normal approximation needs enough expected hits
        const double expected_hits = acc.moments(stat_key("vshare", k)).mean_x() * kPoints * static_cast<double>(nt);
        if (expected_hits < 50.0) {
            r.notes.push_back("order " + std::to_string(k) + " point share not tested: " + fmt(expected_hits) + " expected hits");
            continue;
        }
        const auto d = acc.moments(stat_key("ptdiff", k));
        r.checks.push_back(make_check(tag + " minus vertex share", d.mean_x(), 0.0, d.se_x()));
    }
    r.notes.push_back(std::to_string(nt) + " trees of order 10; orders above " + std::to_string(kLimitOrders) +
                      " compared with finite-K means only");
    return r;
}

CriterionResult walk_laws(const AcceptanceOptions& o) {
    CriterionResult r;
    constexpr double gamma = 1.0;
    constexpr int kBranch = 4, kTok = 6, kSpan = 4;
    const WalkParams sym{0.5, 2.0 * gamma, 2.0 * gamma};
    const auto n = scaled(50000, o);
    const auto seed = criterion_seed(o, 13);
    auto acc = run_indexed(n, o.workers, Accumulator{}, [&](std::uint64_t i, Accumulator& a) {
        Rng rng = make_stream(seed, i);
        const auto x = sample_walk_excursion(sym, rng, 100000);
        if (!x) {
            a.count("censored");
            return;
        }
        const Tree t = level_set_tree(*x).tree;
        if (t.leaf_count() == 1) a.count("single");
        const auto h = horton_orders(t);
        const auto d = branch_decompose(t, h);
        std::vector<double> count(kBranch + 1, 0.0), len(kBranch + 1, 0.0);
        for (std::size_t b = 0; b < d.branches.size(); ++b) {
            const int j = d.branches[b].order;
            if (j > kBranch) continue;
            count[j] += 1.0;
            for (int v : d.branch_edges(static_cast<int>(b))) len[j] += t.length[v];
        }
        for (int j = 1; j <= kBranch; ++j) a.add_pair(stat_key("branch", j), count[j], len[j]);
    });
    const double N = static_cast<double>(n);
    r.checks.push_back(make_check("p0 (single-edge trees)", acc.counts("single") / N, 0.5, std::sqrt(0.25 / N)));
    for (int j = 1; j <= kBranch; ++j) {
        const auto m = acc.moments(stat_key("branch", j));
        r.checks.push_back(make_check("order-" + std::to_string(j) + " branch mean length", m.ratio(), 1.0 / (gamma * pow2(2 - j)), m.ratio_se()));
    }
    r.notes.push_back(std::to_string(acc.counts("censored")) + " of " + std::to_string(n) + " excursions censored at 1e5 steps");

    const auto walks = scaled(64, o);
    const std::size_t steps = std::size_t{1} << 17;
    const auto long_seed = criterion_seed(o, 13, 1);
    auto tok_acc = run_indexed(walks, o.workers, Accumulator{}, [&](std::uint64_t i, Accumulator& a) {
        Rng rng = make_stream(long_seed, i);
        const Tree t = level_set_tree(sample_exp_walk({0.5, 1.0, 1.0}, steps, rng)).tree;
        accumulate_tokunaga(a, branch_decompose(t, horton_orders(t)));
    });
    const auto tok = tokunaga_from(tok_acc, kTok);
    for (int j = 2; j <= kTok; ++j)
        for (int i = std::max(1, j - kSpan); i < j; ++i)
            r.checks.push_back(make_check("walk T_" + std::to_string(i) + "," + std::to_string(j), tok.t[i][j], pow2(j - i - 1), tok.se[i][j]));
    r.notes.push_back(std::to_string(walks) + " walks of 2^17 steps, one cluster per walk");

    struct Triple {
        double rho, lu, ld;
    };
    for (const Triple t : {Triple{0.5, 2.0, 2.0}, Triple{0.3, 1.5, 4.0}, Triple{0.75, 0.2, 3.0}}) {
        const auto k = minima_kernel({t.rho, t.lu, t.ld});
        const double rho = t.rho * t.ld / (t.rho * t.ld + (1.0 - t.rho) * t.lu);
        const std::string tag = "kernel (" + fmt(t.rho) + "," + fmt(t.lu) + "," + fmt(t.ld) + ") ";
        r.checks.push_back(make_exact_check(tag + "rho*", k.rho, rho, 0.0));
        r.checks.push_back(make_exact_check(tag + "lambda_u*", k.lambda_up, (1.0 - t.rho) * t.lu, 0.0));
        r.checks.push_back(make_exact_check(tag + "lambda_d*", k.lambda_down, t.rho * t.ld, 0.0));
    }

    std::vector<double> s_values;
    for (int i = 0; i < 20; ++i) s_values.push_back(0.25 * i + 0.1 * (i % 3));
    double worst = 0.0;
    for (double lambda : {1.0, 2.5})
        for (double res : verify_char_identity(lambda, s_values)) worst = std::max(worst, std::abs(res));
    r.checks.push_back(make_exact_check("exponential kernel residual, max over 20 points", worst, 0.0, 1e-12));
    const auto uniform = [](double s) {
        if (s == 0.0) return std::complex<double>(1.0);
        return (std::exp(std::complex<double>(0.0, s)) - 1.0) / std::complex<double>(0.0, s);
    };
    double uworst = 0.0;
    for (double res : char_identity_residuals(uniform, s_values)) uworst = std::max(uworst, std::abs(res));
    Check control{"uniform kernel residual stays away from 0", uworst, 0.0, 0.0, 0.0, 1e-3};
    control.pass = uworst > 1e-3;
    r.checks.push_back(control);
    return r;
}

struct Entry {
    const char* title;
    CriterionResult (*run)(const AcceptanceOptions&);
};

const Entry kEntries[kCriterionCount] = {
    {"order by pruning equals Horton-Strahler order", order_equivalence},
    {"level set tree inverts the Harris path", reciprocity},
    {"local minima commute with pruning", commutation},
    {"pruning commutes with proper embedding", embedding_commutation},
    {"Horton exponent and t_hat closed form", horton_exponent_check},
    {"width series criticality regimes", criticality_check},
    {"truncated ODE vs closed form", ode_closed_form},
    {"critical Tokunaga process vs critical Galton-Watson", gw_equivalence},
    {"direct vs event-driven sampler", cross_sampler},
    {"prune invariance", prune_invariance},
    {"width function", width_function},
    {"principal subtrees, vertex and point orders", combinatorial_laws},
    {"exponential walk excursions", walk_laws},
};

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
    if (id < 1 || id > kCriterionCount) throw std::invalid_argument("unknown criterion " + std::to_string(id));
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = kEntries[id - 1].run(options);
    } catch (const std::exception& e) {
        r.checks.clear();
        r.notes.push_back(std::string("error: ") + e.what());
    }
    r.id = id;
    r.title = kEntries[id - 1].title;
    r.pass = !r.checks.empty() && std::all_of(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.pass; });
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_done) {
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriterionCount; ++id) {
        if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) continue;
        out.push_back(run_criterion(id, options));
        if (on_done) on_done(out.back());
    }
    return out;
}

std::string check_line(const Check& c) {
    std::string s = c.pass ? "  ok    " : "  FAIL  ";
    s += c.name + ": observed " + fmt(c.observed) + ", expected " + fmt(c.expected);
    if (c.se > 0.0)
        s += ", se " + fmt(c.se) + ", z " + fmt((c.observed - c.expected) / c.se) + " (band " + fmt(c.band) + ")";
    else
        s += ", tol " + fmt(c.tol);
    return s;
}

std::string summary_line(const CriterionResult& r) {
    double worst_z = 0.0;
    int stat = 0, failed = 0;
    for (const auto& c : r.checks) {
        failed += !c.pass;
        // separation checks pass outside the band and are left out of the maximum
        if (c.se > 0.0 && c.band > 0.0 && c.pass == (std::abs(c.observed - c.expected) <= c.band * c.se)) {
            ++stat;
            worst_z = std::max(worst_z, std::abs(c.observed - c.expected) / c.se);
        }
    }
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s  %2d  %s  [%zu checks, %d failed%s]  %.1f s", r.pass ? "PASS" : "FAIL", r.id,
                  r.title.c_str(), r.checks.size(), failed,
                  stat ? (", max |z| " + fmt(worst_z)).c_str() : "", r.seconds);
    return buf;
}

}  // namespace hortonlab
