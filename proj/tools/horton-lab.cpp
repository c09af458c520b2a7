#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hortonlab/acceptance.hpp"
#include "hortonlab/campaign.hpp"
#include "hortonlab/hydrodynamics.hpp"
#include "hortonlab/io.hpp"
#include "hortonlab/pruning.hpp"
#include "hortonlab/samplers.hpp"
#include "hortonlab/statistics.hpp"
#include "hortonlab/transforms.hpp"

#ifndef HORTONLAB_VERSION
#define HORTONLAB_VERSION "dev"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hortonlab;

namespace {

// --- manifest -----------------------------------------------------------------

// Written next to the primary output before any work starts and rewritten at
// the end; a manifest left with "complete": false marks partial artifacts.
class Manifest {
public:
    Manifest(std::string command, const std::vector<std::string>& argv, fs::path path)
        : path_(std::move(path)) {
        doc_["command"] = std::move(command);
        doc_["argv"] = argv;
        doc_["tool_version"] = HORTONLAB_VERSION;
        doc_["artifacts"] = json::array();
        doc_["complete"] = false;
    }

    void begin(const ParamMap& params, std::uint64_t seed, int workers) {
        json p = json::object();
        for (const auto& [k, v] : params.values()) p[k] = v;
        doc_["params"] = p;
        doc_["seed"] = seed;
        doc_["workers"] = workers;
        write();
    }
    void artifact(const fs::path& p) { doc_["artifacts"].push_back(p.string()); }
    void result(const std::string& key, json value) { doc_["results"][key] = std::move(value); }
    void finish() {
        doc_["complete"] = true;
        write();
    }
    void fail(const std::string& message) {
        doc_["complete"] = false;
        doc_["error"] = message;
        write();
    }

private:
    void write() const {
        std::ofstream out(path_);
        if (!out) throw std::runtime_error("cannot write manifest " + path_.string());
        out << doc_.dump(2) << '\n';
    }

    fs::path path_;
    json doc_;
};

fs::path manifest_path(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return in;
}

// --- parameters ---------------------------------------------------------------

struct Common {
    std::string params_file;
    std::vector<std::string> sets;
    std::uint64_t seed = 7;
    int workers = 0;
    std::string out;
};

void add_key_values(ParamMap& p, const std::vector<std::string>& items) {
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected key=value, got '" + item + "'");
        p.set(item.substr(0, eq), item.substr(eq + 1));
    }
}

ParamMap load_params(const Common& c) {
    ParamMap p;
    if (!c.params_file.empty()) {
        auto in = open_in(c.params_file);
        p = ParamMap::parse(in);
    }
    add_key_values(p, c.sets);
    return p;
}

int workers_of(const Common& c) { return c.workers > 0 ? c.workers : worker_count(); }

// critical:c, or tokunaga_head / tokunaga_a / tokunaga_c; default T_k = 2^{k-1}.
TokunagaRule tokunaga_rule(const ParamMap& p) {
    const bool explicit_rule = p.has("tokunaga_head") || p.has("tokunaga_a");
    if (!explicit_rule) return TokunagaRule::critical(p.number("c", 2.0));
    TokunagaRule r = p.has("tokunaga_head") ? TokunagaRule::list(p.numbers("tokunaga_head")) : TokunagaRule::zero();
    if (p.has("tokunaga_a")) {
        r.geometric_tail = true;
        r.tail_a = p.number("tokunaga_a");
        r.tail_c = p.number("tokunaga_c");
    }
    return r;
}

bool has_explicit_rule(const ParamMap& p) { return p.has("tokunaga_head") || p.has("tokunaga_a") || p.has("c"); }

RateRule rate_rule(const ParamMap& p) {
    RateRule r = RateRule::geometric(p.number("gamma", 1.0), p.number("zeta", 2.0));
    if (p.has("rates_head")) r.head = p.numbers("rates_head");
    return r;
}

// Critical Tokunaga parameters unless p, orders or rates_head are given.
ProcessParams process_params(const ParamMap& p) {
    const bool general = p.has("orders") || p.has("rates_head");
    if (!general && !p.has("p")) return CriticalTokunagaParams{p.number("c", 2.0), p.number("gamma", 1.0)}.expand();
    if (!general)
        return SelfSimilarParams{p.number("p"), p.number("gamma", 1.0), p.number("zeta", 2.0), tokunaga_rule(p)}.expand();
    ProcessParams out;
    out.tokunaga = tokunaga_rule(p);
    out.rates = rate_rule(p);
    out.orders = p.has("orders") ? OrderDistribution::list(p.numbers("orders")) : OrderDistribution::geometric(p.number("p"));
    if (p.has("max_order_cap")) out.max_order_cap = static_cast<int>(p.number("max_order_cap"));
    out.validate();
    return out;
}

WalkParams walk_params(const ParamMap& p) {
    return {p.number("rho", 0.5), p.number("lambda_up", 1.0), p.number("lambda_down", 1.0)};
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw std::invalid_argument("grid must be s0:s1:n");
    const double a = std::stod(parts[0]), b = std::stod(parts[1]);
    const int n = std::stoi(parts[2]);
    if (n < 1 || (n == 1 && a != b) || b < a) throw std::invalid_argument("grid needs s0 <= s1 and n >= 1");
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return g;
}

// --- tree files ---------------------------------------------------------------

std::vector<Tree> read_trees(const fs::path& path) {
    auto in = open_in(path);
    const auto ext = path.extension().string();
    std::vector<Tree> trees;
    if (ext == ".nwk" || ext == ".newick") {
        std::string line;
        while (std::getline(in, line))
            if (line.find_first_not_of(" \t\r") != std::string::npos) trees.push_back(tree_from_newick(line, true));
    } else if (ext == ".json") {
        std::stringstream buf;
        buf << in.rdbuf();
        trees.push_back(tree_from_json(buf.str()));
    } else {
        trees = read_jsonl(in);
    }
    for (const auto& t : trees) {
        const auto v = validate(t);
        if (!v.valid) throw std::invalid_argument(path.string() + ": invalid tree: " + v.violations.front());
    }
    return trees;
}

json check_json(const Check& c) {
    return {{"name", c.name}, {"observed", c.observed}, {"expected", c.expected}, {"se", c.se},
            {"band", c.band}, {"tol", c.tol},           {"pass", c.pass}};
}

json report_json(const Report& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(check_json(c));
    return {{"name", r.name}, {"pass", r.pass()}, {"checks", checks}, {"notes", r.notes}};
}

void write_checks_csv(std::ostream& out, const std::vector<Check>& checks) {
    out << "name,observed,expected,se,band,tol,pass\n";
    for (const auto& c : checks)
        out << '"' << c.name << "\"," << format_double(c.observed) << ',' << format_double(c.expected) << ','
            << format_double(c.se) << ',' << format_double(c.band) << ',' << format_double(c.tol) << ','
            << (c.pass ? "true" : "false") << '\n';
}

void write_s_value(std::ostream& out, const std::vector<double>& s, const std::vector<double>& v) {
    out << "s,value\n";
    for (std::size_t i = 0; i < s.size(); ++i) out << format_double(s[i]) << ',' << format_double(v[i]) << '\n';
}

fs::path companion(const fs::path& out, const std::string& suffix) {
    fs::path p = out;
    p.replace_extension();
    return fs::path(p.string() + suffix);
}

// --- commands -----------------------------------------------------------------

struct NoAcc {
    void merge(const NoAcc&) {}
};

void simulate(const Common& c, const std::string& model, std::uint64_t n, const ParamMap& p, Manifest& m) {
    if (n == 0) throw std::invalid_argument("simulate: --n must be positive");
    const fs::path out = c.out;
    const int workers = workers_of(c);
    if (model == "walk") {
        const auto params = walk_params(p);
        const auto steps = static_cast<std::size_t>(p.number("steps", 1000));
        for (std::uint64_t i = 0; i < n; ++i) {
            Rng rng = make_stream(c.seed, i);
            const auto series = sample_exp_walk(params, steps, rng);
            const fs::path file = n == 1 ? out : companion(out, "." + std::to_string(i) + ".csv");
            auto f = open_out(file);
            write_series_csv(f, series);
            m.artifact(file);
        }
        return;
    }

    std::function<Tree(Rng&)> draw;
    if (model == "hbp" || model == "hbp-events") {
        auto sampler = std::make_shared<HbpSampler>(process_params(p), static_cast<std::size_t>(p.number("max_nodes", 1 << 20)));
        const int K = static_cast<int>(p.number("order", 0));
        const bool events = model == "hbp-events";
        draw = [sampler, K, events](Rng& rng) {
            if (events) return K > 0 ? sampler->sample_events_order(K, rng).tree : sampler->sample_events(rng).tree;
            return K > 0 ? sampler->sample_order(K, rng) : sampler->sample(rng);
        };
    } else if (model == "gw") {
        const double p0 = p.number("p0", 0.5);
        const auto cap = static_cast<std::size_t>(p.number("max_nodes", 1 << 20));
        draw = [p0, cap](Rng& rng) { return sample_gw_shape(p0, rng, cap); };
    } else if (model == "exp-gw") {
        const double lp = p.number("lambda_prime", 0.0), l = p.number("lambda", 1.0);
        const auto cap = static_cast<std::size_t>(p.number("max_nodes", 1 << 20));
        draw = [lp, l, cap](Rng& rng) { return sample_exp_gw(lp, l, rng, cap); };
    } else if (model == "attach") {
        const std::string law = p.get("law").value_or("poisson");
        CountLaw cl = CountLaw::poisson;
        if (law == "point") cl = CountLaw::point;
        else if (law == "geometric") cl = CountLaw::geometric;
        else if (law != "poisson") throw std::invalid_argument("attach: law must be point, poisson or geometric");
        const AttachmentLaw a{cl, tokunaga_rule(p)};
        const int K = static_cast<int>(p.number("order"));
        draw = [a, K](Rng& rng) { return sample_random_attachment(a, K, rng); };
    } else {
        throw std::invalid_argument("unknown model '" + model + "'");
    }

    // Draws above the size cap are skipped under cap_policy = skip and listed
    // in the manifest, so the output is the sample conditioned on the cap.
    const std::string policy = p.get("cap_policy").value_or("skip");
    if (policy != "skip" && policy != "error") throw std::invalid_argument("cap_policy must be skip or error");
    std::vector<std::string> lines(n);
    std::vector<char> capped(n, 0);
    run_indexed(n, workers, NoAcc{}, [&](std::uint64_t i, NoAcc&) {
        Rng rng = make_stream(c.seed, i);
        try {
            lines[i] = tree_to_json(draw(rng));
        } catch (const CapError&) {
            if (policy == "error") throw;
            capped[i] = 1;
        }
    });
    auto f = open_out(out);
    json skipped = json::array();
    for (std::uint64_t i = 0; i < n; ++i) {
        if (capped[i]) skipped.push_back(i);
        else f << lines[i] << '\n';
    }
    m.artifact(out);
    m.result("written", n - skipped.size());
    m.result("capped_indices", skipped);
}

json tokunaga_json(const TokunagaEstimate& e) {
    json rows = json::array();
    for (int j = 2; j <= e.K; ++j)
        for (int i = 1; i < j; ++i)
            rows.push_back({{"i", i}, {"j", j}, {"t", e.t[i][j]}, {"se", e.se[i][j]}, {"n_ij", e.nij_total[i][j]}, {"n_j", e.nj_total[j]}});
    return {{"K", e.K}, {"trees", e.trees}, {"entries", rows}};
}

// Runs one statistics suite; returns whether all checks passed.
bool stats_suite(const std::string& suite, const Common& c, const fs::path& in, const ParamMap& p, const std::string& grid,
                 Manifest& m) {
    auto trees = read_trees(in);
    if (p.has("order")) {
        const int K = static_cast<int>(p.number("order"));
        std::erase_if(trees, [K](const Tree& t) { return horton_orders(t).tree_order != K; });
    }
    if (trees.empty()) throw std::invalid_argument("stats: empty sample in " + in.string());
    const fs::path out = c.out;
    json doc{{"suite", suite}, {"input", in.string()}, {"trees", trees.size()}};
    Report report;
    report.name = suite;
    std::ostringstream table;

    if (suite == "tokunaga") {
        const auto e = estimate_tokunaga_pooled(trees);
        doc["estimate"] = tokunaga_json(e);
        if (has_explicit_rule(p)) {
            const auto rule = tokunaga_rule(p);
            const double min_branches = p.number("min_branches", 30.0);
            for (int j = 2; j <= e.K; ++j)
                for (int i = 1; i < j; ++i)
                    if (e.se[i][j] > 0.0 && e.nj_total[j] >= min_branches)
                        report.add(make_check("T_" + std::to_string(i) + "," + std::to_string(j), e.t[i][j], rule(j - i), e.se[i][j]));
        }
        table << "i,j,t,se\n";
        for (int j = 2; j <= e.K; ++j)
            for (int i = 1; i < j; ++i)
                table << i << ',' << j << ',' << format_double(e.t[i][j]) << ',' << format_double(e.se[i][j]) << '\n';
    } else if (suite == "horton") {
        const auto h = horton_stats(trees);
        doc["K"] = h.K;
        doc["mean_counts"] = std::vector<double>(h.mean_counts.begin() + 1, h.mean_counts.end());
        doc["ratios"] = std::vector<double>(h.ratios.begin() + 1, h.ratios.end());
        doc["R"] = h.R;
        table << "k,mean_count,ratio\n";
        for (int k = 1; k <= h.K; ++k) table << k << ',' << format_double(h.mean_counts[k]) << ',' << format_double(h.ratios[k]) << '\n';
    } else if (suite == "orders") {
        std::optional<double> target;
        if (p.has("p")) target = p.number("p");
        const auto fit = order_distribution_test(std::span<const Tree>(trees), target);
        report = fit.report;
        doc["p_mle"] = fit.p_mle;
        doc["chi2"] = fit.chi2;
        doc["bins"] = fit.bins;
        table << "K,p_hat\n";
        for (std::size_t k = 1; k < fit.p_hat.size(); ++k) table << k << ',' << format_double(fit.p_hat[k]) << '\n';
    } else if (suite == "prune") {
        // even positions form the reference census, odd positions are pruned
        Census original, pruned;
        for (std::size_t i = 0; i < trees.size(); ++i) {
            if (i % 2 == 0) {
                original[census_key(trees[i])] += 1;
            } else {
                const Tree t = prune(trees[i]).pruned;
                if (!t.is_empty()) pruned[census_key(t)] += 1;
            }
        }
        const auto cmp = compare_census(original, pruned, 4.0, p.number("min_expected", 50.0));
        report = cmp.report;
        doc["chi2"] = cmp.chi2;
        doc["bins_tested"] = cmp.bins_tested;
        table << "shape,original,pruned\n";
        for (const auto& [k, v] : original) table << '"' << k << "\"," << v << ',' << (pruned.count(k) ? pruned.at(k) : 0) << '\n';
    } else if (suite == "side") {
        report = side_branch_test(trees, process_params(p));
    } else if (suite == "principal") {
        const auto st = principal_subtree_stats(trees, c.seed, tokunaga_rule(p), p.number("p", 0.5),
                                                static_cast<int>(p.number("kmax", 64)));
        report = st.report;
        doc["n"] = st.n;
        table << "a,b,count\n";
        for (const auto& [ab, v] : st.joint) table << ab.first << ',' << ab.second << ',' << v << '\n';
    } else if (suite == "vertex") {
        std::optional<TokunagaRule> rule;
        if (has_explicit_rule(p)) rule = tokunaga_rule(p);
        report = vertex_order_frequencies(trees, rule);
    } else if (suite == "width") {
        const auto g = parse_grid(grid);
        const auto w = empirical_width(std::span<const Tree>(trees), g);
        doc["s"] = w.s;
        doc["c"] = w.c;
        doc["se"] = w.se;
        table << "s,value,se\n";
        for (std::size_t i = 0; i < w.s.size(); ++i) table << format_double(w.s[i]) << ',' << format_double(w.c[i]) << ',' << format_double(w.se[i]) << '\n';
    } else {
        throw std::invalid_argument("unknown suite '" + suite + "'");
    }

    report.name = suite;
    doc["report"] = report_json(report);
    doc["pass"] = report.pass();
    auto f = open_out(out);
    f << doc.dump(2) << '\n';
    m.artifact(out);

    const fs::path checks_csv = companion(out, "_checks.csv");
    auto fc = open_out(checks_csv);
    write_checks_csv(fc, report.checks);
    m.artifact(checks_csv);
    if (!table.str().empty()) {
        const fs::path data_csv = companion(out, ".csv");
        auto fd = open_out(data_csv);
        fd << table.str();
        m.artifact(data_csv);
    }
    m.result("pass", report.pass());
    return report.pass();
}

GeneratorSpec numeric_spec(const ParamMap& p) {
    const auto rule = tokunaga_rule(p);
    const auto rates = rate_rule(p);
    if (p.has("pi")) return explicit_spec(rule, rates, p.numbers("pi"), static_cast<int>(p.number("kmax")));
    return geometric_spec(rule, rates, p.number("p", 0.5), p.number("tail_tol", 1e-12));
}

json criterion_json(const CriterionResult& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(check_json(c));
    return {{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"seconds", r.seconds}, {"checks", checks}, {"notes", r.notes}};
}

std::vector<int> parse_suite(const std::string& suite) {
    if (suite == "all") return {};
    std::vector<int> ids;
    std::stringstream ss(suite);
    for (std::string part; std::getline(ss, part, ',');) {
        const int id = std::stoi(part);
        if (id < 1 || id > kCriterionCount) throw std::invalid_argument("criterion ids run from 1 to " + std::to_string(kCriterionCount));
        ids.push_back(id);
    }
    return ids;
}

int dispatch(std::vector<std::string> args);

// --- CLI wiring -----------------------------------------------------------------

void common_options(CLI::App* sub, Common& c, bool with_seed, bool out_required, const std::string& out_default = "") {
    sub->add_option("--params", c.params_file, "flat key = value parameter file")->check(CLI::ExistingFile);
    sub->add_option("--set", c.sets, "extra key=value parameters, overriding --params");
    if (with_seed) sub->add_option("--seed", c.seed, "master seed");
    sub->add_option("--workers", c.workers, "worker threads (default HORTONLAB_WORKERS or 1)");
    auto* o = sub->add_option("--out", c.out, "output path");
    if (out_required) o->required();
    if (!out_default.empty()) c.out = out_default;
}

int dispatch(std::vector<std::string> args) {
    CLI::App app{"Horton-Strahler tree sampling, pruning, level set transforms, statistics and branch-count numerics", "horton-lab"};
    app.set_version_flag("--version", HORTONLAB_VERSION);
    app.require_subcommand(1);

    Common c;
    std::string model, in, suite = "all", grid = "0:10:101";
    std::uint64_t n = 1;
    int iter = 1;
    double scale = 1.0, stem = 0.0, tol = 1e-10;
    bool excursion = false;
    std::vector<std::string> critical_kv;
    std::optional<double> fp, fzeta, fc, fgamma;

    auto* sim = app.add_subcommand("simulate", "sample trees or walks");
    common_options(sim, c, true, true);
    sim->add_option("--model", model, "hbp | hbp-events | gw | exp-gw | attach | walk")
        ->required()
        ->check(CLI::IsMember({"hbp", "hbp-events", "gw", "exp-gw", "attach", "walk"}));
    sim->add_option("--n", n, "number of samples");
    sim->add_option("--critical-tokunaga", critical_kv, "c=<c> gamma=<gamma>");

    auto* prune_cmd = app.add_subcommand("prune", "apply leaf pruning m times");
    common_options(prune_cmd, c, false, true);
    prune_cmd->add_option("--in", in, "trees (.jsonl, .json or .nwk)")->required()->check(CLI::ExistingFile);
    prune_cmd->add_option("--iter", iter, "number of prunings")->check(CLI::NonNegativeNumber);

    auto* order_cmd = app.add_subcommand("order", "Horton-Strahler orders of each tree");
    common_options(order_cmd, c, false, true);
    order_cmd->add_option("--in", in, "trees")->required()->check(CLI::ExistingFile);

    auto* tok_cmd = app.add_subcommand("tokunaga-stats", "Tokunaga coefficient estimates");
    common_options(tok_cmd, c, false, true);
    tok_cmd->add_option("--in", in, "trees")->required()->check(CLI::ExistingFile);

    auto* stats_cmd = app.add_subcommand("stats", "statistics suites over a tree sample");
    common_options(stats_cmd, c, true, true);
    stats_cmd->add_option("--in", in, "trees")->required()->check(CLI::ExistingFile);
    stats_cmd->add_option("--suite", suite, "tokunaga | horton | orders | prune | side | principal | vertex | width")
        ->required()
        ->check(CLI::IsMember({"tokunaga", "horton", "orders", "prune", "side", "principal", "vertex", "width"}));
    stats_cmd->add_option("--grid", grid, "s0:s1:n for the width suite");

    auto* ls_cmd = app.add_subcommand("levelset", "level set tree of a series or excursion CSV");
    common_options(ls_cmd, c, false, true);
    ls_cmd->add_option("--in", in, "CSV with k,value or t,value rows")->required()->check(CLI::ExistingFile);
    ls_cmd->add_option("--stem", stem, "root stem length for series that do not end at their start level");

    auto* harris_cmd = app.add_subcommand("harris", "Harris path of an embedded tree");
    common_options(harris_cmd, c, false, true);
    harris_cmd->add_option("--in", in, "tree (.json, .jsonl first line, .nwk first line)")->required()->check(CLI::ExistingFile);
    bool embed = false;
    harris_cmd->add_flag("--embed", embed, "apply the proper embedding to trees that are not embedded");

    auto* walk_cmd = app.add_subcommand("walk", "exponential random walk");
    common_options(walk_cmd, c, true, true);
    walk_cmd->add_option("--n", n, "number of values, including the start");
    walk_cmd->add_flag("--excursion", excursion, "sample one positive excursion instead (n caps the steps)");

    auto numeric = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        common_options(sub, c, false, true);
        sub->add_option("--grid", grid, "s0:s1:n");
        sub->add_option("--p", fp, "geometric order parameter");
        sub->add_option("--zeta", fzeta, "rate ratio");
        sub->add_option("--c", fc, "critical Tokunaga c");
        sub->add_option("--gamma", fgamma, "rate scale");
        return sub;
    };
    auto* ode_cmd = numeric("ode", "integrate the truncated branch-count ODE, CSV of the total");
    auto* width_cmd = numeric("width", "width function C(s) from its series");
    auto* classify_cmd = numeric("classify", "criticality class as JSON");
    auto* inv_cmd = numeric("invariance", "time invariance residual ||x(s) - pi||_1");
    ode_cmd->add_option("--tol", tol, "absolute and relative tolerance");

    auto* accept_cmd = app.add_subcommand("accept", "run the acceptance battery");
    common_options(accept_cmd, c, true, false, "acceptance_report.json");
    accept_cmd->add_option("--suite", suite, "all or comma separated criterion ids");
    accept_cmd->add_option("--scale", scale, "sample size multiplier");

    std::string replay_path;
    auto* replay_cmd = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    replay_cmd->add_option("--manifest", replay_path, "manifest JSON")->required()->check(CLI::ExistingFile);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (replay_cmd->parsed()) {
        auto f = open_in(replay_path);
        const json doc = json::parse(f);
        return dispatch(doc.at("argv").get<std::vector<std::string>>());
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    ParamMap p = load_params(c);
    if (!critical_kv.empty()) add_key_values(p, critical_kv);
    if (fp) p.set("p", format_double(*fp));
    if (fzeta) p.set("zeta", format_double(*fzeta));
    if (fc) p.set("c", format_double(*fc));
    if (fgamma) p.set("gamma", format_double(*fgamma));
    if (sub == sim || sub == walk_cmd) p.set("n", std::to_string(n));
    if (sub == sim) p.set("model", model);
    if (sub == prune_cmd) p.set("iter", std::to_string(iter));
    if (sub == harris_cmd && embed) p.set("embed", "true");
    if (!in.empty()) p.set("in", in);
    if (sub == stats_cmd || sub == accept_cmd) p.set("suite", suite);

    const fs::path out = c.out;
    Manifest m(command, args, manifest_path(out));
    m.begin(p, c.seed, workers_of(c));
    int status = 0;
    try {
        if (sub == sim) {
            simulate(c, model, n, p, m);
        } else if (sub == prune_cmd) {
            auto trees = read_trees(in);
            auto f = open_out(out);
            for (auto& t : trees) f << tree_to_json(prune_iter(t, iter)) << '\n';
            m.artifact(out);
        } else if (sub == order_cmd) {
            const auto trees = read_trees(in);
            auto f = open_out(out);
            f << "index,order,leaves\n";
            for (std::size_t i = 0; i < trees.size(); ++i)
                f << i << ',' << horton_orders(trees[i]).tree_order << ',' << trees[i].leaf_count() << '\n';
            m.artifact(out);
        } else if (sub == tok_cmd) {
            status = stats_suite("tokunaga", c, in, p, grid, m) ? 0 : 1;
        } else if (sub == stats_cmd) {
            status = stats_suite(suite, c, in, p, grid, m) ? 0 : 1;
        } else if (sub == ls_cmd) {
            auto f = open_in(in);
            std::string header;
            std::getline(f, header);
            f.seekg(0);
            const auto tree = header.rfind("k,", 0) == 0 ? level_set_tree(read_series_csv(f), stem) : level_set_tree(read_excursion_csv(f), stem);
            auto o = open_out(out);
            o << tree_to_json(tree.tree) << '\n';
            m.artifact(out);
            m.result("ties", tree.ties);
        } else if (sub == harris_cmd) {
            const auto trees = read_trees(in);
            if (trees.empty()) throw std::invalid_argument("harris: no tree in " + in);
            auto o = open_out(out);
            const Tree& t = trees.front();
            write_excursion_csv(o, harris_path(embed && !t.embedded ? proper_embed(t) : t));
            m.artifact(out);
        } else if (sub == walk_cmd) {
            Rng rng = make_stream(c.seed, 0);
            auto o = open_out(out);
            if (excursion) {
                const auto x = sample_walk_excursion(walk_params(p), rng, n);
                if (!x) throw std::runtime_error("walk: excursion did not close within " + std::to_string(n) + " steps");
                write_excursion_csv(o, *x);
            } else {
                write_series_csv(o, sample_exp_walk(walk_params(p), n, rng));
            }
            m.artifact(out);
        } else if (sub == ode_cmd) {
            const auto g = parse_grid(grid);
            const auto sol = ode_solve(numeric_spec(p), g, tol);
            std::vector<double> total;
            for (std::size_t i = 0; i < sol.s.size(); ++i) total.push_back(sol.total(i));
            auto o = open_out(out);
            write_s_value(o, sol.s, total);
            m.artifact(out);
            m.result("max_tail_bound", *std::max_element(sol.tail_bound.begin(), sol.tail_bound.end()));
        } else if (sub == width_cmd) {
            const auto g = parse_grid(grid);
            const auto w = width_series(p.number("p", 0.5), p.number("gamma", 1.0), p.number("zeta", 2.0), tokunaga_rule(p), g);
            auto o = open_out(out);
            write_s_value(o, w.s, w.c);
            m.artifact(out);
        } else if (sub == classify_cmd) {
            const auto rule = tokunaga_rule(p);
            const double pp = p.number("p", 0.5), zeta = p.number("zeta", 2.0);
            const double R = horton_exponent(rule);
            json doc{{"p", pp}, {"zeta", zeta}, {"R", R}, {"p_critical", 1.0 - zeta / R},
                     {"class", to_string(classify_criticality(pp, zeta, rule))}};
            auto o = open_out(out);
            o << doc.dump(2) << '\n';
            m.artifact(out);
        } else if (sub == inv_cmd) {
            const auto g = parse_grid(grid);
            const auto r = time_invariance_residual(numeric_spec(p), g);
            auto o = open_out(out);
            write_s_value(o, r.s, r.l1);
            m.artifact(out);
            m.result("R", r.R);
            m.result("b", r.b);
            m.result("algebraic", r.algebraic);
        } else if (sub == accept_cmd) {
            AcceptanceOptions opt;
            opt.seed = c.seed;
            opt.workers = workers_of(c);
            opt.scale = scale;
            opt.only = parse_suite(suite);
            json criteria = json::array();
            bool all = true;
            run_acceptance(opt, [&](const CriterionResult& r) {
                std::cout << summary_line(r) << '\n';
                for (const auto& ch : r.checks)
                    if (!ch.pass) std::cout << check_line(ch) << '\n';
                std::cout.flush();
                criteria.push_back(criterion_json(r));
                all = all && r.pass;
            });
            json doc{{"seed", opt.seed}, {"scale", opt.scale}, {"pass", all}, {"criteria", criteria}};
            auto o = open_out(out);
            o << doc.dump(2) << '\n';
            m.artifact(out);
            m.result("pass", all);
            status = all ? 0 : 1;
        }
    } catch (const std::exception& e) {
        m.fail(e.what());
        throw;
    }
    m.finish();
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const std::exception& e) {
        std::cerr << "horton-lab: error: " << e.what() << '\n';
        return 2;
    }
}
