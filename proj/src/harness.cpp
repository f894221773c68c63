#include "ldplab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ldplab/error.hpp"
#include "ldplab/parallel.hpp"
#include "ldplab/random.hpp"
#include "ldplab/simulator.hpp"
#include "ldplab/skeleton.hpp"

namespace ldplab {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(mix64(seed) ^ (a + 1)) + 0x632be59bd9b4e019ULL * (b + 1));
}

SimOptions lean_options() {
    SimOptions o;
    o.keep_states = false;
    o.keep_noise = false;
    o.sample_silent_jumps = false;
    return o;
}

}  // namespace

EventSpec EventSpec::half_space(double level, std::size_t mode) {
    if (std::isnan(level)) throw std::invalid_argument("EventSpec: level is NaN");
    EventSpec e;
    e.kind = Kind::half_space;
    e.level = level;
    e.mode = mode;
    return e;
}

EventSpec EventSpec::ball_complement(SpectralField z, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("EventSpec: radius must be >= 0");
    EventSpec e;
    e.kind = Kind::ball_complement;
    e.centre = std::move(z);
    e.radius = r;
    return e;
}

bool EventSpec::contains(const SpectralField& x) const {
    if (kind == Kind::half_space) {
        if (mode >= x.size()) throw std::invalid_argument("EventSpec: mode out of range");
        return x[mode] >= level;
    }
    return (x - centre).h_norm() >= radius;
}

TerminalTarget EventSpec::target() const {
    if (kind == Kind::half_space) return TerminalTarget::half_space(level, mode);
    return TerminalTarget::ball_complement(centre, radius);
}

ProbabilityEstimate estimate_probability(const Model& model, double epsilon, const EventSpec& event, std::size_t n,
                                         std::uint64_t seed, std::size_t steps) {
    if (n < 100) throw std::invalid_argument("estimate_probability: need n >= 100 paths");
    const TimeGrid grid = TimeGrid::uniform(model.horizon, steps);
    const SimOptions opts = lean_options();
    std::vector<char> hit(n, 0);
    parallel_for(n, [&](std::size_t i) {
        const SdePath p = simulate_uncontrolled(model, epsilon, model.x0, grid, seed, i, opts);
        hit[i] = event.contains(p.terminal) ? 1 : 0;
    });
    ProbabilityEstimate est;
    est.n = n;
    for (char h : hit) est.hits += static_cast<std::size_t>(h);
    est.p_hat = static_cast<double>(est.hits) / static_cast<double>(n);
    est.ci = wilson_interval(est.hits, n);
    est.zero_hits = est.hits == 0;
    return est;
}

SlopeReport ldp_slope(const Model& model, const EventSpec& event, const std::vector<double>& eps_list, std::size_t n,
                      std::uint64_t seed, const SlopeOptions& opts) {
    if (eps_list.empty()) throw std::invalid_argument("ldp_slope: empty eps list");
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        if (!(eps_list[e] > 0.0) || eps_list[e] > 0.1) throw std::invalid_argument("ldp_slope: every eps must lie in (0, 0.1]");
        if (e > 0 && !(eps_list[e] < eps_list[e - 1])) throw std::invalid_argument("ldp_slope: eps list must decrease");
    }
    SlopeReport rep;
    rep.eps_list = eps_list;
    auto give_up = [&](const std::string& why) {
        if (!rep.inconclusive) rep.reason = why;
        rep.inconclusive = true;
    };

    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        const std::uint64_t run_seed = derive_seed(seed, e);
        const std::uint64_t pilot_seed = derive_seed(seed, e, static_cast<std::uint64_t>(Purpose::pilot));

        std::size_t pilot_n = std::max<std::size_t>(opts.pilot, 100);
        ProbabilityEstimate pilot;
        for (;;) {
            pilot = estimate_probability(model, eps, event, pilot_n, pilot_seed, opts.steps);
            if (pilot.hits >= opts.min_pilot_hits || pilot_n >= opts.max_paths) break;
            pilot_n = std::min(pilot_n * 10, opts.max_paths);
        }
        std::size_t main_n = std::max<std::size_t>(n, 100);
        if (pilot.hits > 0) {
            const double need = std::ceil(static_cast<double>(opts.target_hits) / pilot.p_hat);
            if (need > static_cast<double>(main_n)) main_n = static_cast<std::size_t>(need);
        }
        main_n = std::min(main_n, opts.max_paths);
        const double expected = pilot.p_hat * static_cast<double>(main_n);

        ProbabilityEstimate est;
        if (expected < static_cast<double>(opts.min_hits)) {
            give_up("expected hits " + std::to_string(expected) + " below " + std::to_string(opts.min_hits) +
                    " at eps = " + std::to_string(eps) + " within the path cap");
            est.n = pilot.n;
            est.hits = pilot.hits;
            est.p_hat = pilot.p_hat;
            est.ci = pilot.ci;
        } else {
            est = estimate_probability(model, eps, event, main_n, run_seed, opts.steps);
            if (est.hits < opts.min_hits)
                give_up("only " + std::to_string(est.hits) + " hits at eps = " + std::to_string(eps));
        }
        rep.p_hats.push_back(est.p_hat);
        rep.cis.push_back(est.ci);
        rep.hits.push_back(est.hits);
        rep.paths.push_back(est.n);
        rep.eps_log_p.push_back(est.hits > 0 ? eps * std::log(est.p_hat) : -std::numeric_limits<double>::infinity());
    }

    if (eps_list.size() < 2) give_up("a single eps value cannot be extrapolated to eps -> 0");
    if (!rep.inconclusive) {
        if (eps_list.size() >= 3) {
            std::vector<double> design;
            for (double eps : eps_list) {
                design.push_back(1.0);
                design.push_back(eps);
                design.push_back(eps * std::log(eps));
            }
            rep.fit = least_squares(design, 3, rep.eps_log_p);
            rep.fit_model = "eps log p = c0 + c1 eps + c2 eps log eps";
        } else {
            const LinearFit lf = linear_fit(eps_list, rep.eps_log_p);
            rep.fit = {lf.intercept, lf.slope};
            rep.fit_model = "eps log p = c0 + c1 eps";
        }
        rep.slope = rep.fit.front();
    }

    if (opts.compare_rate) {
        const ControlPair init = ControlPair::constant(model.horizon, opts.rate_intervals, SpectralField(model.modes()),
                                                       std::vector<double>(model.marks.size(), 1.0));
        const RateEstimate rate = minimize_rate(model, event.target(), init, opts.rate);
        rep.rate_value = rate.value;
        rep.minimizer = rate.minimizer;
        if (!rep.inconclusive && std::isfinite(rate.value)) {
            const double diff = std::abs(-rep.slope - rate.value);
            rep.relative_gap = rate.value > 0.0 ? diff / rate.value : diff;
        }
    }
    return rep;
}

ImportanceEstimate importance_sampling_estimate(const Model& model, double epsilon, const EventSpec& event,
                                                const ControlPair& u, std::size_t n, std::uint64_t seed,
                                                std::size_t steps) {
    if (n == 0) throw std::invalid_argument("importance_sampling_estimate: n must be positive");
    const TimeGrid grid = TimeGrid::uniform(model.horizon, steps);
    const SimOptions opts = lean_options();
    std::vector<double> contrib(n, 0.0);
    std::vector<char> hit(n, 0);
    std::vector<char> flag(n, 0);
    parallel_for(n, [&](std::size_t i) {
        const SdePath p = simulate_controlled(model, epsilon, u, model.x0, grid, seed, i, opts);
        if (!event.contains(p.terminal)) return;
        hit[i] = 1;
        const double w = std::exp(-p.log_weight);
        if (p.flagged || !std::isfinite(w)) {
            flag[i] = 1;
            return;
        }
        contrib[i] = w;
    });
    ImportanceEstimate est;
    est.n = n;
    RunningStats rs;
    for (std::size_t i = 0; i < n; ++i) {
        rs.add(contrib[i]);
        est.hits += static_cast<std::size_t>(hit[i]);
        est.flagged += static_cast<std::size_t>(flag[i]);
    }
    if (static_cast<double>(est.flagged) > 1e-3 * static_cast<double>(n))
        throw FlaggedSamples("importance_sampling_estimate: " + std::to_string(est.flagged) + " of " +
                             std::to_string(n) + " weights are infinite");
    est.p_hat = rs.mean();
    est.std_error = rs.std_error();
    est.ci = normal_interval(est.p_hat, est.std_error);
    est.ci.lo = std::max(0.0, est.ci.lo);
    const double crude = est.p_hat * (1.0 - est.p_hat);
    est.variance_ratio = crude > 0.0 ? rs.variance() / crude : std::numeric_limits<double>::quiet_NaN();
    est.weighted = std::move(contrib);
    return est;
}

ConvergenceTableA convergence_experiment_a(const Model& model, const std::vector<ControlPair>& q_sequence,
                                           const ControlPair& q, std::size_t steps,
                                           const std::vector<double>& indices) {
    if (!indices.empty() && indices.size() != q_sequence.size())
        throw std::invalid_argument("convergence_experiment_a: one index per control required");
    const TimeGrid grid = TimeGrid::uniform(model.horizon, steps);
    const SkeletonSolution limit = solve_skeleton(model, q, grid);
    ConvergenceTableA t;
    t.indices = indices;
    t.distances.resize(q_sequence.size());
    parallel_for(q_sequence.size(), [&](std::size_t i) {
        t.distances[i] = sup_distance(solve_skeleton(model, q_sequence[i], grid).trajectory, limit.trajectory);
    });
    for (std::size_t i = 1; i < t.distances.size(); ++i)
        if (t.distances[i] > t.distances[i - 1] + 1e-9) t.nonincreasing = false;
    if (!indices.empty()) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            num += t.distances[i] / indices[i];
            den += 1.0 / (indices[i] * indices[i]);
        }
        t.fitted_c = den > 0.0 ? num / den : 0.0;
    }
    return t;
}

std::vector<ControlPair> shrinking_sequence(const ControlPair& q, const std::vector<std::size_t>& n_list) {
    std::vector<ControlPair> out;
    for (std::size_t n : n_list) {
        if (n == 0) throw std::invalid_argument("shrinking_sequence: n must be >= 1");
        out.push_back(q.shrunk(1.0 - 1.0 / static_cast<double>(n)));
    }
    return out;
}

ConvergenceTableB convergence_experiment_b(const Model& model, const ControlPair& u,
                                           const std::vector<double>& eps_list, std::size_t n, std::uint64_t seed,
                                           std::size_t steps) {
    const TimeGrid grid = TimeGrid::uniform(model.horizon, steps);
    const SkeletonSolution limit = solve_skeleton(model, u, grid);
    ConvergenceTableB t;
    t.eps_list = eps_list;
    t.inconclusive = n < 20;
    SimOptions opts;
    opts.keep_noise = false;
    opts.sample_silent_jumps = false;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        std::vector<double> d(n);
        const std::uint64_t s = derive_seed(seed, e);
        parallel_for(n, [&](std::size_t i) {
            const SdePath p = simulate_controlled(model, eps_list[e], u, model.x0, grid, s, i, opts);
            d[i] = sup_distance(p.states, limit.trajectory);
        });
        RunningStats rs;
        for (double v : d) rs.add(v);
        t.means.push_back(rs.mean());
        t.medians.push_back(n > 0 ? median(d) : 0.0);
    }
    for (std::size_t e = 1; e < t.medians.size(); ++e)
        if (!(t.medians[e] < t.medians[e - 1])) t.monotone = false;
    if (!t.medians.empty() && t.medians.front() > 0.0) t.ratio = t.medians.back() / t.medians.front();
    return t;
}

TightnessReport tightness_report(const Model& model, const std::vector<double>& eps_list,
                                 const std::vector<ControlPair>& u_list, const std::vector<std::size_t>& k_list,
                                 double t0, std::size_t n, std::uint64_t seed, std::size_t steps) {
    if (!(t0 > 0.0 && t0 < model.horizon)) throw std::invalid_argument("tightness_report: t0 must lie in (0, T)");
    if (n == 0) throw std::invalid_argument("tightness_report: n must be positive");
    for (std::size_t k : k_list)
        if (k < 1 || k > model.modes() + 1) throw std::invalid_argument("tightness_report: k must lie in [1, K+1]");
    const TimeGrid grid = TimeGrid::uniform(model.horizon, steps);
    SimOptions opts;
    opts.keep_noise = false;
    opts.sample_silent_jumps = false;

    TightnessReport rep;
    rep.t0 = t0;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        for (std::size_t c = 0; c < u_list.size(); ++c) {
            const std::uint64_t s = derive_seed(seed, e, c);
            std::vector<double> head(n * k_list.size());
            std::vector<double> tail(n * k_list.size());
            parallel_for(n, [&](std::size_t i) {
                const SdePath p = simulate_controlled(model, eps_list[e], u_list[c], model.x0, grid, s, i, opts);
                for (std::size_t kk = 0; kk < k_list.size(); ++kk) {
                    const auto [h, t] = tail_energy(p, k_list[kk], t0);
                    head[i * k_list.size() + kk] = h;
                    tail[i * k_list.size() + kk] = t;
                }
            });
            std::vector<double> zs;
            std::vector<double> logs;
            for (std::size_t kk = 0; kk < k_list.size(); ++kk) {
                RunningStats hs;
                RunningStats ts;
                for (std::size_t i = 0; i < n; ++i) {
                    hs.add(head[i * k_list.size() + kk]);
                    ts.add(tail[i * k_list.size() + kk]);
                }
                TightnessRow row;
                row.epsilon = eps_list[e];
                row.control = c;
                row.k = k_list[kk];
                row.mean_tail = ts.mean();
                row.tail_se = ts.std_error();
                row.mean_head = hs.mean();
                if (row.k <= model.modes()) {
                    const double zeta = model.eigen.zeta(row.k - 1);
                    row.envelope_c = row.mean_tail * std::exp(2.0 * zeta * t0);
                    if (row.mean_tail > 0.0) {
                        zs.push_back(zeta);
                        logs.push_back(std::log(row.mean_tail));
                    }
                }
                rep.rows.push_back(row);
            }
            TightnessFit fit;
            fit.epsilon = eps_list[e];
            fit.control = c;
            fit.predicted = -2.0 * t0;
            bool distinct = false;
            for (double z : zs) distinct = distinct || z != zs.front();
            if (zs.size() >= 2 && distinct) {
                const LinearFit lf = linear_fit(zs, logs);
                fit.slope = lf.slope;
                fit.fitted_c = std::exp(lf.intercept);
            }
            rep.fits.push_back(fit);
        }
    }
    return rep;
}

}  // namespace ldplab
