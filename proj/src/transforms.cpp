#include "hortonlab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace hortonlab {

namespace {

struct Extremum {
    std::size_t index;  // first index of the plateau
    double value;
    bool is_max;
};

// Alternating extrema of a sequence; both endpoints are always kept.
std::vector<Extremum> extrema(std::span<const double> v, bool& ties) {
    std::vector<Extremum> runs;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!runs.empty() && v[i] == runs.back().value) {
            ties = true;
            continue;
        }
        runs.push_back({i, v[i], false});
    }
    const std::size_t m = runs.size();
    if (m <= 1) return runs;
    std::vector<Extremum> out;
    for (std::size_t i = 0; i < m; ++i) {
        const bool up = i > 0 && runs[i].value > runs[i - 1].value;
        const bool down = i + 1 < m && runs[i].value > runs[i + 1].value;
        if (i == 0) {
            runs[i].is_max = down;
            out.push_back(runs[i]);
        } else if (i + 1 == m) {
            runs[i].is_max = up;
            out.push_back(runs[i]);
        } else if (up == down) {
            runs[i].is_max = up;
            out.push_back(runs[i]);
        }
    }
    return out;
}

LevelSetResult level_set_from_values(std::span<const double> values, double root_stem_length) {
    LevelSetResult res;
    res.tree = Tree::empty(true);
    res.tree.embedded = true;
    const auto ex = extrema(values, res.ties);

    std::vector<double> maxima, minima;  // minima[i] lies between maxima[i] and maxima[i+1]
    std::optional<double> boundary_min;
    for (std::size_t k = 0; k < ex.size(); ++k) {
        const auto& e = ex[k];
        if (e.is_max) {
            maxima.push_back(e.value);
        } else if (k == 0 || k + 1 == ex.size()) {
            boundary_min = boundary_min ? std::min(*boundary_min, e.value) : e.value;
        } else {
            minima.push_back(e.value);
        }
    }
    const int n = static_cast<int>(maxima.size());
    if (n == 0) return res;

    // Cartesian tree on the interior minima; equal values nest to the right.
    const int m = n - 1;
    std::vector<int> left(m, kNone), right(m, kNone), stack;
    for (int i = 0; i < m; ++i) {
        int last = kNone;
        while (!stack.empty() && minima[stack.back()] > minima[i]) {
            last = stack.back();
            stack.pop_back();
        }
        left[i] = last;
        if (!stack.empty()) right[stack.back()] = i;
        stack.push_back(i);
    }
    if (m > 0) {
        std::vector<double> sorted = minima;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) res.ties = true;
        if (boundary_min && *boundary_min == sorted.front()) res.ties = true;
    }

    // Vertex ids: maxima 0..n-1, minimum i is n+i.
    auto value = [&](int x) { return x < n ? maxima[x] : minima[x - n]; };
    auto kids = [&](int x) -> std::array<int, 2> {
        const int i = x - n;
        return {left[i] != kNone ? n + left[i] : i, right[i] != kNone ? n + right[i] : i + 1};
    };
    const int top = m > 0 ? n + stack.front() : 0;

    Tree& t = res.tree;
    int stem;
    if (boundary_min && *boundary_min <= value(top)) {
        stem = t.add_node(0, value(top) - *boundary_min);
    } else {
        stem = t.add_node(0, 0.0);
        t.root_stem_length = root_stem_length;
    }
    std::vector<std::pair<int, int>> work;  // (vertex id, tree node)
    work.push_back({top, stem});
    while (!work.empty()) {
        const auto [x, node] = work.back();
        work.pop_back();
        if (x < n) continue;
        const auto c = kids(x);
        const int a = t.add_node(node, value(c[0]) - value(x));
        const int b = t.add_node(node, value(c[1]) - value(x));
        work.push_back({c[1], b});
        work.push_back({c[0], a});
    }
    return res;
}

void check_excursion(const Excursion& x) {
    if (x.values.size() < 2 || x.times.size() != x.values.size())
        throw std::invalid_argument("excursion needs matching times and at least two values");
    for (std::size_t i = 1; i < x.times.size(); ++i)
        if (!(x.times[i] > x.times[i - 1])) throw std::invalid_argument("excursion times must increase strictly");
    for (double v : x.values)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("excursion values must be finite and nonnegative");
    if (x.values.front() != 0.0 || x.values.back() != 0.0)
        throw std::invalid_argument("excursion must start and end at 0");
}

}  // namespace

Excursion harris_path(const Tree& tree) {
    if (tree.is_empty()) throw std::invalid_argument("harris_path: empty tree");
    if (!tree.has_lengths()) throw std::invalid_argument("harris_path: tree has no edge lengths");
    if (!tree.embedded) throw std::invalid_argument("harris_path: tree is not embedded");
    std::vector<double> h(tree.size(), 0.0);
    for (int v : preorder(tree))
        if (v != 0) h[v] = h[tree.parent[v]] + tree.edge_length(v);

    std::vector<double> vals{0.0};
    std::vector<std::pair<int, int>> stack{{tree.stem(), 0}};
    while (!stack.empty()) {
        auto& [v, phase] = stack.back();
        const auto c = tree.child[v];
        if (phase == 0) {
            if (tree.is_leaf(v)) {
                vals.push_back(h[v]);
                stack.pop_back();
                continue;
            }
            phase = 1;
            stack.push_back({c[0], 0});
        } else if (phase == 1) {
            phase = 2;
            if (c[1] != kNone) {
                vals.push_back(h[v]);
                stack.push_back({c[1], 0});
            }
        } else {
            stack.pop_back();
        }
    }
    vals.push_back(0.0);

    Excursion e;
    e.values = std::move(vals);
    e.times.resize(e.values.size());
    e.times[0] = 0.0;
    for (std::size_t i = 1; i < e.values.size(); ++i)
        e.times[i] = e.times[i - 1] + std::abs(e.values[i] - e.values[i - 1]);
    return e;
}

LevelSetResult level_set_tree(const Excursion& x, double root_stem_length) {
    check_excursion(x);
    return level_set_from_values(x.values, root_stem_length);
}

LevelSetResult level_set_tree(const TimeSeries& x, double root_stem_length) {
    if (x.values.empty()) throw std::invalid_argument("level_set_tree: empty series");
    return level_set_from_values(x.values, root_stem_length);
}

Excursion canonical_excursion(const Excursion& x) {
    bool ties = false;
    const auto ex = extrema(x.values, ties);
    Excursion out;
    double t = x.times.empty() ? 0.0 : x.times.front();
    for (std::size_t k = 0; k < ex.size(); ++k) {
        if (k > 0) t += std::abs(ex[k].value - ex[k - 1].value);
        out.times.push_back(t);
        out.values.push_back(ex[k].value);
    }
    return out;
}

Excursion local_minima_series(const Excursion& x) {
    bool ties = false;
    const auto ex = extrema(x.values, ties);
    Excursion out;
    for (std::size_t k = 0; k < ex.size(); ++k) {
        if (ex[k].is_max && k != 0 && k + 1 != ex.size()) continue;
        out.times.push_back(x.times[ex[k].index]);
        out.values.push_back(ex[k].value);
    }
    if (out.times.size() == 1 && x.times.size() > 1) {
        out.times.push_back(x.times.back());
        out.values.push_back(x.values.back());
    }
    return out;
}

TimeSeries local_minima_series(const TimeSeries& x) {
    bool ties = false;
    const auto ex = extrema(x.values, ties);
    TimeSeries out;
    for (std::size_t k = 0; k < ex.size(); ++k)
        if (!ex[k].is_max || k == 0 || k + 1 == ex.size()) out.values.push_back(ex[k].value);
    if (out.values.size() == 1 && x.values.size() > 1) out.values.push_back(x.values.back());
    return out;
}

std::vector<Excursion> extract_excursions(const TimeSeries& series) {
    const auto& X = series.values;
    const std::size_t n = X.size();
    std::vector<Excursion> out;
    if (n < 3) return out;
    std::vector<std::size_t> next_le(n, n), stack;
    for (std::size_t i = n; i-- > 0;) {
        while (!stack.empty() && X[stack.back()] > X[i]) stack.pop_back();
        if (!stack.empty()) next_le[i] = stack.back();
        stack.push_back(i);
    }
    for (std::size_t l = 0; l + 2 <= n; ++l) {
        const std::size_t r = next_le[l];
        if (r == n || r < l + 2) continue;
        Excursion e;
        for (std::size_t k = l; k < r; ++k) {
            e.times.push_back(static_cast<double>(k));
            e.values.push_back(X[k] - X[l]);
        }
        const double a = X[r - 1] - X[l];
        const double b = X[r - 1] - X[r];
        e.times.push_back(static_cast<double>(r - 1) + a / b);
        e.values.push_back(0.0);
        out.push_back(std::move(e));
    }
    return out;
}

WalkParams minima_kernel(const WalkParams& p) {
    if (!(p.rho > 0.0 && p.rho < 1.0)) throw std::invalid_argument("minima_kernel requires 0 < rho < 1");
    if (!(p.lambda_up > 0.0) || !(p.lambda_down > 0.0)) throw std::invalid_argument("walk rates must be positive");
    const double up = (1.0 - p.rho) * p.lambda_up;
    const double down = p.rho * p.lambda_down;
    return {down / (down + up), up, down};
}

std::vector<double> char_identity_residuals(const std::function<std::complex<double>(double)>& fhat,
                                            const std::vector<double>& s_values) {
    std::vector<double> out;
    out.reserve(s_values.size());
    for (double s : s_values) {
        const auto f = fhat(s);
        out.push_back(fhat(2.0 * s).real() - std::norm(f / (2.0 - f)));
    }
    return out;
}

std::vector<double> verify_char_identity(double lambda, const std::vector<double>& s_values) {
    if (!(lambda > 0.0)) throw std::invalid_argument("verify_char_identity requires lambda > 0");
    return char_identity_residuals(
        [lambda](double s) { return std::complex<double>(lambda) / std::complex<double>(lambda, -s); }, s_values);
}

}  // namespace hortonlab
