#include "ldplab/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/version.hpp>

#include "ldplab/error.hpp"
#include "ldplab/harness.hpp"
#include "ldplab/noise.hpp"
#include "ldplab/parallel.hpp"
#include "ldplab/rate.hpp"
#include "ldplab/simulator.hpp"
#include "ldplab/skeleton.hpp"

namespace ldplab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// JSON has no infinity; keep it readable.
json jnum(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
}

json jvec(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(jnum(x));
    return a;
}

json jfield(const SpectralField& f) { return jvec(f.vector()); }

class RunDir {
public:
    explicit RunDir(fs::path root) : root_(std::move(root)) {}

    const fs::path& root() const { return root_; }
    const std::vector<std::string>& files() const { return files_; }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(root_ / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (root_ / name).string());
        out << content;
        files_.push_back(name);
    }

    std::ofstream open_binary(const std::string& name) {
        files_.push_back(name);
        return std::ofstream(root_ / name, std::ios::binary);
    }

private:
    fs::path root_;
    std::vector<std::string> files_;
};

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header) { row_strings(header); }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
        os_ << "\n";
    }
    void row(const std::vector<double>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << num(cells[i]);
        os_ << "\n";
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

std::vector<std::string> mode_columns(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t k = 1; k <= n; ++k) out.push_back(prefix + std::to_string(k));
    return out;
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

ControlPair control_or_zero(const ExperimentConfig& cfg) {
    if (cfg.experiment.control) return cfg.experiment.control->build(cfg.model);
    return ControlPair::zero(cfg.model.horizon, cfg.model.modes(), cfg.model.marks.size());
}

std::size_t sim_steps(const ExperimentConfig& cfg) {
    return cfg.experiment.sim_steps ? cfg.experiment.sim_steps : cfg.steps;
}

void control_csv(RunDir& dir, const std::string& name, const ControlPair& q, const MarkMeasure& mm) {
    std::vector<std::string> head{"t_start", "t_end"};
    for (auto& c : mode_columns("f", q.modes())) head.push_back(c);
    for (std::size_t j = 0; j < q.marks(); ++j) head.push_back("g_" + mm.label(j));
    Csv csv(head);
    for (std::size_t i = 0; i < q.intervals(); ++i) {
        std::vector<double> r{q.partition()[i], q.partition()[i + 1]};
        for (std::size_t k = 0; k < q.modes(); ++k) r.push_back(q.f(i)[k]);
        for (std::size_t j = 0; j < q.marks(); ++j) r.push_back(q.g(i, j));
        csv.row(r);
    }
    dir.write(name, csv.str());
}

int run_skeleton(const ExperimentConfig& cfg, RunDir& dir, json& summary) {
    const Model& model = cfg.model;
    const ControlPair q = control_or_zero(cfg);
    SkeletonOptions opts;
    opts.tol = cfg.experiment.tol;
    opts.max_iter = cfg.experiment.max_iter;
    const TimeGrid grid = TimeGrid::uniform(model.horizon, cfg.steps);
    const SkeletonSolution sol = solve_skeleton(model, q, grid, opts);

    std::vector<std::string> head{"t"};
    for (auto& c : mode_columns("x", model.modes())) head.push_back(c);
    head.push_back("h_norm");
    Csv traj(head);
    for (std::size_t m = 0; m < sol.times.size(); ++m) {
        std::vector<double> r{sol.times[m]};
        for (double v : sol.trajectory[m].coeffs()) r.push_back(v);
        r.push_back(sol.trajectory[m].h_norm());
        traj.row(r);
    }
    dir.write("trajectory.csv", traj.str());
    Csv res({"n", "sup_residual", "ratio"});
    for (std::size_t n = 0; n < sol.sup_residuals.size(); ++n)
        res.row({static_cast<double>(n + 1), sol.sup_residuals[n],
                 n ? sol.sup_residuals[n] / sol.sup_residuals[n - 1] : std::nan("")});
    dir.write("residuals.csv", res.str());
    control_csv(dir, "control.csv", q, model.marks);

    const CostReport cost = cost_of_control(q, model.marks);
    summary["iterations"] = sol.iterations;
    summary["final_residual"] = sol.sup_residuals.back();
    summary["tol"] = sol.tol;
    summary["sup_h2"] = sol.sup_h2;
    summary["integral_v2"] = sol.integral_v2;
    summary["terminal"] = jfield(sol.terminal());
    summary["cost"] = {{"tilde", cost.tilde_cost}, {"jump", cost.jump_cost}, {"total", cost.total}};
    if (sol.sup_residuals.size() >= 3) {
        const PicardDiagnostics d = picard_diagnostics(sol);
        summary["picard"] = {{"envelope_constant", d.envelope_constant},
                             {"fitted_constant", d.fitted_constant},
                             {"ratios_decreasing", d.ratios_decreasing},
                             {"last_ratio", d.last_ratio}};
    }
    const AprioriBound b = apriori_bound(model, std::max(cost.tilde_cost, cost.jump_cost));
    summary["apriori_bound"] = {{"sup_h2", jnum(b.sup_h2)}, {"with_energy", jnum(b.with_energy)}};
    return kExitOk;
}

int run_simulate(const ExperimentConfig& cfg, RunDir& dir, json& summary) {
    const Model& model = cfg.model;
    const ExperimentParams& xp = cfg.experiment;
    const ControlPair u = control_or_zero(cfg);
    const TimeGrid grid = TimeGrid::uniform(model.horizon, sim_steps(cfg));
    const std::size_t n = xp.paths;
    const std::size_t K = model.modes();

    struct Row {
        SpectralField terminal;
        double sup_h2, log_weight;
        std::size_t jumps;
        bool flagged;
        std::vector<double> mean_path;
    };
    std::vector<Row> rows(n);
    SimOptions opts;
    opts.keep_noise = false;
    parallel_for(n, [&](std::size_t i) {
        const SdePath p = simulate_controlled(model, xp.epsilon, u, model.x0, grid, cfg.seed, i, opts);
        Row r{p.terminal, p.sup_h2, p.log_weight, p.jump_count, p.flagged, {}};
        r.mean_path.reserve(p.states.size() * K);
        for (const auto& s : p.states)
            for (double v : s.coeffs()) r.mean_path.push_back(v);
        rows[i] = std::move(r);
    });

    std::vector<std::string> head{"replica"};
    for (auto& c : mode_columns("x", K)) head.push_back(c + "_T");
    for (const char* c : {"h_norm_T", "sup_h2", "jumps", "log_weight", "flagged"}) head.push_back(c);
    Csv csv(head);
    std::vector<double> mean(grid.size() * K, 0.0);
    RunningStats terminal_norm;
    RunningStats sup;
    RunningStats weight;
    for (std::size_t i = 0; i < n; ++i) {
        const Row& r = rows[i];
        std::vector<double> cells{static_cast<double>(i)};
        for (double v : r.terminal.coeffs()) cells.push_back(v);
        cells.insert(cells.end(), {r.terminal.h_norm(), r.sup_h2, static_cast<double>(r.jumps), r.log_weight,
                                   r.flagged ? 1.0 : 0.0});
        csv.row(cells);
        for (std::size_t m = 0; m < mean.size(); ++m) mean[m] += r.mean_path[m] / static_cast<double>(n);
        terminal_norm.add(r.terminal.h_norm());
        sup.add(r.sup_h2);
        if (!r.flagged) weight.add(std::exp(-r.log_weight));
    }
    dir.write("paths.csv", csv.str());
    std::vector<std::string> mhead{"t"};
    for (auto& c : mode_columns("mean_x", K)) mhead.push_back(c);
    Csv mcsv(mhead);
    for (std::size_t m = 0; m < grid.size(); ++m) {
        std::vector<double> cells{grid[m]};
        for (std::size_t k = 0; k < K; ++k) cells.push_back(mean[m * K + k]);
        mcsv.row(cells);
    }
    dir.write("mean_path.csv", mcsv.str());

    if (xp.dump_noise) {
        SimOptions full;
        const SdePath p = simulate_controlled(model, xp.epsilon, u, model.x0, grid, cfg.seed, 0, full);
        NoiseBundle b;
        b.seed = cfg.seed;
        b.grid = grid.nodes();
        b.brownian = p.increments;
        for (const auto& j : p.jumps) b.jumps.push_back({j.time, j.mark});
        auto out = dir.open_binary("noise_0.bin");
        write_noise_bundle(out, b);
    }

    summary["epsilon"] = xp.epsilon;
    summary["paths"] = n;
    summary["terminal_h_norm"] = {{"mean", terminal_norm.mean()}, {"se", terminal_norm.std_error()}};
    summary["sup_h2"] = {{"mean", sup.mean()}, {"se", sup.std_error()}, {"max", sup.max()}};
    summary["weight"] = {{"mean", weight.mean()}, {"se", weight.std_error()}};
    summary["controlled"] = !u.is_zero_control();
    return kExitOk;
}

json rate_json(const RateEstimate& r) {
    json trace = json::array();
    for (const auto& s : r.trace)
        trace.push_back({{"penalty", s.penalty},
                         {"iterations", s.iterations},
                         {"objective", jnum(s.objective)},
                         {"cost", s.cost},
                         {"residual", s.residual},
                         {"grad_norm", s.grad_norm},
                         {"stationary", s.stationary}});
    return {{"value", jnum(r.value)},
            {"infinite", r.infinite},
            {"penalty_residual", r.penalty_residual},
            {"cost", {{"tilde", r.cost.tilde_cost}, {"jump", r.cost.jump_cost}, {"total", r.cost.total}}},
            {"terminal", jfield(r.terminal)},
            {"evaluations", r.evaluations},
            {"trace", trace}};
}

RateOptions rate_options(const ExperimentConfig& cfg) {
    RateOptions o;
    o.steps = cfg.experiment.rate_steps;
    o.penalties = cfg.experiment.penalties;
    o.max_iter = cfg.experiment.rate_max_iter;
    return o;
}

int run_rate(const ExperimentConfig& cfg, RunDir& dir, json& summary) {
    const Model& model = cfg.model;
    const ExperimentParams& xp = cfg.experiment;
    if (!xp.target) throw std::invalid_argument("rate experiment needs experiment.target");
    const ControlPair init = xp.control ? xp.control->build(model)
                                        : ControlPair::constant(model.horizon, xp.intervals, SpectralField(model.modes()),
                                                                std::vector<double>(model.marks.size(), 1.0));
    const RateEstimate r = minimize_rate(model, *xp.target, init, rate_options(cfg));
    control_csv(dir, "minimizer.csv", r.minimizer, model.marks);
    Csv trace({"stage", "penalty", "iterations", "objective", "cost", "residual", "grad_norm", "stationary"});
    for (std::size_t s = 0; s < r.trace.size(); ++s) {
        const auto& t = r.trace[s];
        trace.row({static_cast<double>(s), t.penalty, static_cast<double>(t.iterations), t.objective, t.cost,
                   t.residual, t.grad_norm, t.stationary ? 1.0 : 0.0});
    }
    dir.write("trace.csv", trace.str());
    summary["rate"] = rate_json(r);
    return kExitOk;
}

int run_validate(const ExperimentConfig& cfg, RunDir& dir, json& summary) {
    const Model& model = cfg.model;
    const ExperimentParams& xp = cfg.experiment;
    if (!xp.event) throw std::invalid_argument("validate-ldp experiment needs experiment.event");
    SlopeOptions so;
    so.steps = xp.sim_steps ? xp.sim_steps : 100;
    so.target_hits = xp.target_hits;
    so.max_paths = xp.max_paths;
    so.compare_rate = xp.compare_rate || xp.importance;
    so.rate = rate_options(cfg);
    so.rate_intervals = xp.intervals;
    const SlopeReport rep = ldp_slope(model, *xp.event, xp.eps_list, std::max<std::size_t>(xp.paths, 100), cfg.seed, so);

    Csv csv({"epsilon", "paths", "hits", "p_hat", "ci_lo", "ci_hi", "eps_log_p"});
    for (std::size_t e = 0; e < rep.p_hats.size(); ++e)
        csv.row({rep.eps_list[e], static_cast<double>(rep.paths[e]), static_cast<double>(rep.hits[e]), rep.p_hats[e],
                 rep.cis[e].lo, rep.cis[e].hi, rep.eps_log_p[e]});
    dir.write("slope.csv", csv.str());
    summary["inconclusive"] = rep.inconclusive;
    if (rep.inconclusive) summary["reason"] = rep.reason;
    summary["slope"] = jnum(rep.slope);
    summary["fit"] = jvec(rep.fit);
    summary["fit_model"] = rep.fit_model;
    summary["rate_value"] = jnum(rep.rate_value);
    summary["relative_gap"] = jnum(rep.relative_gap);
    if (rep.minimizer) control_csv(dir, "minimizer.csv", *rep.minimizer, model.marks);

    if (xp.importance && rep.minimizer && std::isfinite(rep.rate_value)) {
        const double eps = xp.eps_list.back();
        const ImportanceEstimate is =
            importance_sampling_estimate(model, eps, *xp.event, *rep.minimizer, xp.paths, cfg.seed ^ 0x15ULL, so.steps);
        const ProbabilityEstimate crude = estimate_probability(model, eps, *xp.event, std::max<std::size_t>(xp.paths, 100),
                                                               cfg.seed ^ 0x15ULL, so.steps);
        summary["importance"] = {{"epsilon", eps},
                                 {"p_hat", is.p_hat},
                                 {"ci", {is.ci.lo, is.ci.hi}},
                                 {"variance_ratio", jnum(is.variance_ratio)},
                                 {"flagged", is.flagged},
                                 {"crude_p_hat", crude.p_hat},
                                 {"crude_ci", {crude.ci.lo, crude.ci.hi}},
                                 {"cis_overlap", is.ci.overlaps(crude.ci)}};
    }
    return rep.inconclusive ? kExitInconclusive : kExitOk;
}

int run_converge(const ExperimentConfig& cfg, RunDir& dir, json& summary) {
    const Model& model = cfg.model;
    const ExperimentParams& xp = cfg.experiment;
    const ControlPair q = control_or_zero(cfg);
    int code = kExitOk;
    if (xp.variant != "b") {
        const std::vector<std::size_t> n_list =
            xp.n_list.empty() ? std::vector<std::size_t>{1, 2, 5, 10, 20, 50, 100} : xp.n_list;
        std::vector<double> idx(n_list.begin(), n_list.end());
        const ConvergenceTableA t = convergence_experiment_a(model, shrinking_sequence(q, n_list), q, cfg.steps, idx);
        Csv csv({"n", "sup_distance"});
        for (std::size_t i = 0; i < n_list.size(); ++i) csv.row({idx[i], t.distances[i]});
        dir.write("converge_a.csv", csv.str());
        summary["a"] = {{"nonincreasing", t.nonincreasing}, {"fitted_c", t.fitted_c}, {"distances", jvec(t.distances)}};
    }
    if (xp.variant != "a") {
        const std::vector<double> eps = xp.eps_list.empty() ? std::vector<double>{1e-1, 1e-2, 1e-3} : xp.eps_list;
        const ConvergenceTableB t = convergence_experiment_b(model, q, eps, xp.paths, cfg.seed, sim_steps(cfg));
        Csv csv({"epsilon", "median_sup_distance", "mean_sup_distance"});
        for (std::size_t e = 0; e < eps.size(); ++e) csv.row({eps[e], t.medians[e], t.means[e]});
        dir.write("converge_b.csv", csv.str());
        summary["b"] = {{"monotone", t.monotone}, {"ratio", t.ratio}, {"inconclusive", t.inconclusive}};
        if (t.inconclusive) code = kExitInconclusive;
    }
    return code;
}

int run_tightness(const ExperimentConfig& cfg, RunDir& dir, json& summary) {
    const Model& model = cfg.model;
    const ExperimentParams& xp = cfg.experiment;
    std::vector<ControlPair> controls;
    for (const auto& c : xp.controls) controls.push_back(c.build(model));
    if (controls.empty()) controls.push_back(control_or_zero(cfg));
    std::vector<std::size_t> ks = xp.k_list;
    if (ks.empty())
        for (std::size_t k = 2; k <= model.modes(); ++k) ks.push_back(k);
    const std::vector<double> eps = xp.eps_list.empty() ? std::vector<double>{1e-2} : xp.eps_list;
    const TightnessReport rep = tightness_report(model, eps, controls, ks, xp.t0, xp.paths, cfg.seed, sim_steps(cfg));
    Csv csv({"epsilon", "control", "k", "mean_tail", "tail_se", "mean_head", "envelope_c"});
    for (const auto& r : rep.rows)
        csv.row({r.epsilon, static_cast<double>(r.control), static_cast<double>(r.k), r.mean_tail, r.tail_se,
                 r.mean_head, r.envelope_c});
    dir.write("tightness.csv", csv.str());
    json fits = json::array();
    for (const auto& f : rep.fits)
        fits.push_back({{"epsilon", f.epsilon},
                        {"control", f.control},
                        {"slope", jnum(f.slope)},
                        {"fitted_c", jnum(f.fitted_c)},
                        {"predicted", f.predicted},
                        {"window", {-2.5 * rep.t0, -1.5 * rep.t0}}});
    summary["t0"] = rep.t0;
    summary["fits"] = fits;
    return kExitOk;
}

int run_conditions(const ExperimentConfig& cfg, RunDir& dir, json& summary) {
    const Model& model = cfg.model;
    const ExperimentParams& xp = cfg.experiment;
    const ConditionReport rep = check_conditions(model, xp.samples, cfg.seed);
    Csv csv({"inequality", "max_ratio", "worst_time", "worst_norm", "satisfied"});
    for (const InequalityCheck* c : {&rep.growth, &rep.lipschitz})
        csv.row_strings({c->name, num(c->max_ratio), num(c->worst_time), num(c->worst_norm), c->satisfied ? "1" : "0"});
    dir.write("conditions.csv", csv.str());
    summary["satisfied"] = rep.satisfied;
    summary["violated"] = rep.violated;
    summary["samples"] = rep.samples;
    summary["growth_margin"] = 1.0 - rep.growth.max_ratio;
    summary["lipschitz_margin"] = 1.0 - rep.lipschitz.max_ratio;
    summary["exp_integrability"] = {{"delta", xp.delta},
                                    {"zero_norm", jnum(check_exp_integrability(model, xp.delta, 0))},
                                    {"one_norm", jnum(check_exp_integrability(model, xp.delta, 1))}};
    const Lemma34Bounds lb = lemma34_bounds(model, xp.budget, xp.sigma);
    summary["g_integral_bounds"] = {{"budget", xp.budget},
                                    {"sigma", xp.sigma},
                                    {"c2", {jnum(lb.c_2[0]), jnum(lb.c_2[1])}},
                                    {"c1", {jnum(lb.c_1[0]), jnum(lb.c_1[1])}}};
    const AprioriBound ab = apriori_bound(model, xp.budget, xp.sigma);
    summary["apriori_bound"] = {{"sup_h2", jnum(ab.sup_h2)}, {"with_energy", jnum(ab.with_energy)}};
    return kExitOk;
}

}  // namespace

RunResult run(ExperimentConfig cfg, const RunOptions& opts) {
    if (opts.kind) {
        cfg.experiment.kind = *opts.kind;
        cfg.tree["experiment"]["kind"] = *opts.kind;
    }
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.tree["experiment"]["seed"] = static_cast<std::int64_t>(*opts.seed);
    }
    if (opts.out_dir) cfg.output_dir = *opts.out_dir;
    set_worker_threads(opts.threads);

    const std::string hash = cfg.hash();
    const std::string stamp = timestamp();
    fs::path root = fs::path(cfg.output_dir) / (stamp + "-" + hash);
    for (int k = 2; fs::exists(root); ++k) root = fs::path(cfg.output_dir) / (stamp + "-" + hash + "-" + std::to_string(k));
    fs::create_directories(root);
    RunDir dir(root);

    json summary;
    summary["experiment"] = cfg.experiment.kind;
    summary["seed"] = cfg.seed;
    int code = kExitOk;
    const auto started = std::chrono::steady_clock::now();
    try {
        const std::string& k = cfg.experiment.kind;
        if (k == "skeleton") code = run_skeleton(cfg, dir, summary);
        else if (k == "simulate") code = run_simulate(cfg, dir, summary);
        else if (k == "rate") code = run_rate(cfg, dir, summary);
        else if (k == "validate-ldp") code = run_validate(cfg, dir, summary);
        else if (k == "converge") code = run_converge(cfg, dir, summary);
        else if (k == "tightness") code = run_tightness(cfg, dir, summary);
        else if (k == "check-conditions") code = run_conditions(cfg, dir, summary);
        else throw std::invalid_argument("unknown experiment '" + k + "'");
    } catch (const std::exception& e) {
        throw std::runtime_error("experiment " + cfg.experiment.kind + " failed: " + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    summary["status"] = code == kExitOk ? "ok" : "inconclusive";

    dir.write("summary.json", summary.dump(2) + "\n");
    dir.write("config.toml", serialize_config(cfg));
    json manifest = {{"tool", "ldplab"},
                     {"version", kVersion},
                     {"experiment", cfg.experiment.kind},
                     {"seed", cfg.seed},
                     {"config_hash", hash},
                     {"created_utc", stamp},
                     {"wall_seconds", seconds},
                     {"threads", opts.threads},
                     {"warnings", cfg.warnings},
                     {"exit_code", code},
                     {"versions",
                      {{"compiler", __VERSION__}, {"cxx_standard", __cplusplus}, {"boost", BOOST_LIB_VERSION}}}};
    std::vector<std::string> files = dir.files();
    files.push_back("manifest.json");
    manifest["files"] = files;
    dir.write("manifest.json", manifest.dump(2) + "\n");

    RunResult result;
    result.exit_code = code;
    result.run_dir = root.string();
    result.files = dir.files();
    result.summary = std::move(summary);
    return result;
}

}  // namespace ldplab
