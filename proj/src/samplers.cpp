#include "hortonlab/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hortonlab {

double TokunagaRule::operator()(int k) const {
    if (k < 1) return 0.0;
    if (k <= static_cast<int>(head.size())) return head[k - 1];
    if (!geometric_tail) return 0.0;
    return tail_a * std::pow(tail_c, k - 1);
}

double TokunagaRule::growth() const {
    if (geometric_tail && tail_a > 0.0) return tail_c;
    return 0.0;
}

TokunagaRule TokunagaRule::zero() { return {}; }

TokunagaRule TokunagaRule::list(std::vector<double> values) {
    TokunagaRule r;
    r.head = std::move(values);
    return r;
}

TokunagaRule TokunagaRule::geometric(double a, double c, int explicit_terms) {
    TokunagaRule r;
    r.geometric_tail = true;
    r.tail_a = a;
    r.tail_c = c;
    for (int k = 1; k <= explicit_terms; ++k) r.head.push_back(a * std::pow(c, k - 1));
    return r;
}

TokunagaRule TokunagaRule::critical(double c, int explicit_terms) { return geometric(c - 1.0, c, explicit_terms); }

double RateRule::operator()(int j) const {
    if (j >= 1 && j <= static_cast<int>(head.size())) return head[j - 1];
    return gamma * std::pow(zeta, -j);
}

RateRule RateRule::geometric(double gamma, double zeta) {
    RateRule r;
    r.gamma = gamma;
    r.zeta = zeta;
    return r;
}

double OrderDistribution::operator()(int K) const {
    if (K < 1) return 0.0;
    if (p) return *p * std::pow(1.0 - *p, K - 1);
    return K <= static_cast<int>(probs.size()) ? probs[K - 1] : 0.0;
}

OrderDistribution OrderDistribution::geometric(double p) {
    OrderDistribution d;
    d.p = p;
    return d;
}

OrderDistribution OrderDistribution::list(std::vector<double> probs) {
    OrderDistribution d;
    d.probs = std::move(probs);
    return d;
}

void ProcessParams::validate() const {
    if (max_order_cap < 1) throw std::invalid_argument("max_order_cap must be positive");
    for (int k = 1; k <= max_order_cap; ++k) {
        if (!(tokunaga(k) >= 0.0)) throw std::invalid_argument("Tokunaga coefficients must be nonnegative");
        if (!(rates(k) > 0.0) || !std::isfinite(rates(k))) throw std::invalid_argument("rates must be positive");
    }
    if (orders.p) {
        if (!(*orders.p > 0.0 && *orders.p <= 1.0)) throw std::invalid_argument("geometric order parameter must lie in (0,1]");
    } else {
        if (orders.probs.empty()) throw std::invalid_argument("order distribution is empty");
        double s = 0.0;
        for (double q : orders.probs) {
            if (!(q >= 0.0)) throw std::invalid_argument("order probabilities must be nonnegative");
            s += q;
        }
        if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("order probabilities must sum to 1");
    }
}

ProcessParams SelfSimilarParams::expand() const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("self-similar p must lie in (0,1)");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (zeta < std::max(1.0, tokunaga.growth())) throw std::invalid_argument("zeta must be at least max(1, L)");
    ProcessParams pp;
    pp.tokunaga = tokunaga;
    pp.rates = RateRule::geometric(gamma, zeta);
    pp.orders = OrderDistribution::geometric(p);
    return pp;
}

ProcessParams CriticalTokunagaParams::expand() const {
    if (!(c >= 1.0)) throw std::invalid_argument("critical Tokunaga c must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    ProcessParams pp;
    pp.tokunaga = TokunagaRule::critical(c);
    pp.rates = RateRule::geometric(gamma * c * c, c);
    pp.orders = OrderDistribution::geometric(0.5);
    return pp;
}

HbpSampler::HbpSampler(ProcessParams params, std::size_t max_nodes)
    : params_(std::move(params)), max_nodes_(max_nodes), cap_(params_.max_order_cap) {
    params_.validate();
    t_.assign(cap_ + 1, 0.0);
    lambda_.assign(cap_ + 1, 0.0);
    total_.assign(cap_ + 1, 1.0);
    side_cdf_.assign(cap_ + 1, {});
    for (int k = 1; k <= cap_; ++k) {
        t_[k] = params_.tokunaga(k);
        lambda_[k] = params_.rates(k);
    }
    for (int j = 1; j <= cap_; ++j) {
        double acc = 0.0;
        for (int i = 1; i < j; ++i) {
            acc += t_[j - i];
            side_cdf_[j].push_back(acc);
        }
        total_[j] = 1.0 + acc;
    }
    if (!params_.orders.p) {
        double acc = 0.0;
        for (double q : params_.orders.probs) order_cdf_.push_back(acc += q);
    }
}

int HbpSampler::draw_order(Rng& rng) const {
    long long K;
    if (params_.orders.p) {
        const double p = *params_.orders.p;
        K = p >= 1.0 ? 1 : 1 + std::geometric_distribution<long long>(p)(rng);
    } else {
        const double u = std::uniform_real_distribution<double>(0.0, order_cdf_.back())(rng);
        K = 1 + (std::upper_bound(order_cdf_.begin(), order_cdf_.end(), u) - order_cdf_.begin());
        K = std::min<long long>(K, static_cast<long long>(order_cdf_.size()));
    }
    if (K > cap_) throw CapError("order " + std::to_string(K) + " exceeds max_order_cap " + std::to_string(cap_));
    return static_cast<int>(K);
}

int HbpSampler::draw_side_order(int j, Rng& rng) const {
    const auto& cdf = side_cdf_[j];
    const double u = std::uniform_real_distribution<double>(0.0, cdf.back())(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<int>(it - cdf.begin()) + 1;
}

Tree HbpSampler::sample(Rng& rng) const { return sample_order(draw_order(rng), rng); }

Tree HbpSampler::sample_order(int K, Rng& rng) const {
    if (K < 1 || K > cap_) throw CapError("order outside [1, max_order_cap]");
    Tree t = Tree::empty(true);
    struct Task {
        int order, parent;
    };
    std::vector<Task> stack{{K, 0}};
    while (!stack.empty()) {
        const auto [j, par] = stack.back();
        stack.pop_back();
        const double S = total_[j];
        long long m = 0;
        if (S > 1.0) m = std::geometric_distribution<long long>(1.0 / S)(rng);
        if (t.size() + 2 * static_cast<std::size_t>(m) + 3 > max_nodes_) throw CapError("tree size cap exceeded");
        std::exponential_distribution<double> edge(lambda_[j] * S);
        int cur = par;
        for (long long e = 0; e < m; ++e) {
            cur = t.add_node(cur, edge(rng));
            stack.push_back({draw_side_order(j, rng), cur});
        }
        cur = t.add_node(cur, edge(rng));
        if (j >= 2) {
            stack.push_back({j - 1, cur});
            stack.push_back({j - 1, cur});
        }
    }
    return t;
}

EventSample HbpSampler::sample_events(Rng& rng, double horizon) const {
    return sample_events_order(draw_order(rng), rng, horizon);
}

EventSample HbpSampler::sample_events_order(int K, Rng& rng, double horizon) const {
    if (K < 1 || K > cap_) throw CapError("order outside [1, max_order_cap]");
    EventSample out;
    out.log.horizon = horizon;
    const bool build = std::isinf(horizon);
    if (build) out.tree = Tree::empty(true);
    struct Task {
        int order;
        double birth;
        int node;
        int parent_branch;
    };
    std::vector<Task> stack{{K, 0.0, 0, kNone}};
    std::size_t nodes = 1;
    while (!stack.empty()) {
        const Task task = stack.back();
        stack.pop_back();
        const int j = task.order;
        const int id = static_cast<int>(out.log.branches.size());
        out.log.branches.push_back({j, task.birth, std::numeric_limits<double>::infinity(), task.parent_branch});
        double now = task.birth;
        int cur = task.node;
        for (;;) {
            // race: termination at lambda_j against side branching of each order i at lambda_j T_{j-i}
            double wait = std::exponential_distribution<double>(lambda_[j])(rng);
            int winner = 0;
            for (int i = 1; i < j; ++i) {
                const double r = lambda_[j] * t_[j - i];
                if (r <= 0.0) continue;
                const double w = std::exponential_distribution<double>(r)(rng);
                if (w < wait) {
                    wait = w;
                    winner = i;
                }
            }
            now += wait;
            if (now >= horizon) break;
            if (build) {
                if (++nodes > max_nodes_) throw CapError("tree size cap exceeded");
                cur = out.tree.add_node(cur, wait);
            }
            if (winner == 0) {
                out.log.branches[id].death = now;
                if (j >= 2) {
                    stack.push_back({j - 1, now, cur, id});
                    stack.push_back({j - 1, now, cur, id});
                }
                break;
            }
            stack.push_back({winner, now, cur, id});
        }
        if (!build && out.log.branches.size() > max_nodes_) throw CapError("event log size cap exceeded");
    }
    return out;
}

Tree sample_hbp(const ProcessParams& params, std::uint64_t seed) {
    Rng rng(seed);
    return HbpSampler(params).sample(rng);
}

EventSample sample_hbp_events(const ProcessParams& params, std::uint64_t seed) {
    Rng rng(seed);
    return HbpSampler(params).sample_events(rng);
}

namespace {

Tree gw_impl(double p0, Rng& rng, std::size_t max_nodes, double edge_rate) {
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw std::invalid_argument("p0 must lie in [0,1]");
    const bool lengths = edge_rate > 0.0;
    Tree t = Tree::empty(lengths);
    std::bernoulli_distribution split(1.0 - p0);
    std::exponential_distribution<double> edge(lengths ? edge_rate : 1.0);
    std::vector<int> stack{t.add_node(0, lengths ? edge(rng) : 0.0)};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (!split(rng)) continue;
        if (static_cast<std::size_t>(t.size()) + 2 > max_nodes) throw CapError("Galton-Watson tree exceeded the size cap");
        const int a = t.add_node(v, lengths ? edge(rng) : 0.0);
        const int b = t.add_node(v, lengths ? edge(rng) : 0.0);
        stack.push_back(b);
        stack.push_back(a);
    }
    return t;
}

}  // namespace

Tree sample_gw_shape(double p0, Rng& rng, std::size_t max_nodes) { return gw_impl(p0, rng, max_nodes, 0.0); }

Tree sample_gw_shape(double p0, std::uint64_t seed) {
    Rng rng(seed);
    return sample_gw_shape(p0, rng);
}

Tree sample_exp_gw(double lambda_prime, double lambda, Rng& rng, std::size_t max_nodes) {
    if (!(lambda_prime >= 0.0 && lambda_prime < lambda)) throw std::invalid_argument("exp-GW requires 0 <= lambda' < lambda");
    return gw_impl((lambda + lambda_prime) / (2.0 * lambda), rng, max_nodes, 2.0 * lambda);
}

Tree sample_exp_gw(double lambda_prime, double lambda, std::uint64_t seed) {
    Rng rng(seed);
    return sample_exp_gw(lambda_prime, lambda, rng);
}

int AttachmentLaw::draw(int k, Rng& rng) const {
    const double mean = means(k);
    switch (law) {
        case CountLaw::point: {
            const double r = std::round(mean);
            if (std::abs(r - mean) > 1e-12) throw std::invalid_argument("point law needs integer means");
            return static_cast<int>(r);
        }
        case CountLaw::poisson:
            return mean > 0.0 ? std::poisson_distribution<int>(mean)(rng) : 0;
        case CountLaw::geometric:
            return mean > 0.0 ? static_cast<int>(std::geometric_distribution<int>(1.0 / (1.0 + mean))(rng)) : 0;
    }
    return 0;
}

namespace {

// Inserts a new vertex on the parental edge of x and hangs a leaf from it.
void attach_leaf_above(Tree& t, int x) {
    const int p = t.parent[x];
    const int u = t.size();
    t.parent.push_back(p);
    t.child.push_back({x, kNone});
    auto& slots = t.child[p];
    (slots[0] == x ? slots[0] : slots[1]) = u;
    t.parent[x] = u;
    t.add_node(u);
}

}  // namespace

Tree sample_random_attachment(const AttachmentLaw& law, int K, Rng& rng) {
    if (K < 1) throw std::invalid_argument("random attachment needs K >= 1");
    Tree t = Tree::single_edge();
    for (int stage = 2; stage <= K; ++stage) {
        const int n = t.size();
        for (int v = 1; v < n; ++v)
            if (t.is_leaf(v)) {
                t.add_node(v);
                t.add_node(v);
            }
        const auto h = horton_orders(t);
        const auto d = branch_decompose(t, h);
        for (std::size_t b = 0; b < d.branches.size(); ++b) {
            const int j = d.branches[b].order;
            if (j < 2) continue;
            const int count = law.draw(j - 1, rng);
            const auto edges = d.branch_edges(static_cast<int>(b));
            std::uniform_int_distribution<std::size_t> slot(0, edges.size() - 1);
            for (int c = 0; c < count; ++c) attach_leaf_above(t, edges[slot(rng)]);
        }
    }
    return t;
}

Tree sample_random_attachment(const AttachmentLaw& law, int K, std::uint64_t seed) {
    Rng rng(seed);
    return sample_random_attachment(law, K, rng);
}

TimeSeries sample_exp_walk(const WalkParams& w, std::size_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("walk length must be at least 1");
    if (!(w.rho >= 0.0 && w.rho <= 1.0) || !(w.lambda_up > 0.0) || !(w.lambda_down > 0.0))
        throw std::invalid_argument("walk parameters out of range");
    TimeSeries s;
    s.values.reserve(n);
    s.values.push_back(0.0);
    std::bernoulli_distribution up(w.rho);
    std::exponential_distribution<double> rise(w.lambda_up), fall(w.lambda_down);
    for (std::size_t k = 1; k < n; ++k) s.values.push_back(s.values.back() + (up(rng) ? rise(rng) : -fall(rng)));
    return s;
}

TimeSeries sample_exp_walk(const WalkParams& params, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return sample_exp_walk(params, n, rng);
}

std::optional<Excursion> sample_walk_excursion(const WalkParams& w, Rng& rng, std::size_t max_steps) {
    if (!(w.rho > 0.0)) throw std::invalid_argument("excursions need rho > 0");
    std::bernoulli_distribution up(w.rho);
    std::exponential_distribution<double> rise(w.lambda_up), fall(w.lambda_down);
    Excursion e;
    e.times.push_back(0.0);
    e.values.push_back(0.0);
    double x = rise(rng);  // conditioned first step up
    for (std::size_t k = 1;; ++k) {
        e.times.push_back(static_cast<double>(k));
        e.values.push_back(x);
        if (k >= max_steps) return std::nullopt;
        const double next = x + (up(rng) ? rise(rng) : -fall(rng));
        if (next <= 0.0) {
            e.times.push_back(static_cast<double>(k) + x / (x - next));
            e.values.push_back(0.0);
            return e;
        }
        x = next;
    }
}

}  // namespace hortonlab
