#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ldplab/coefficients.hpp"
#include "ldplab/control.hpp"
#include "ldplab/rate.hpp"
#include "ldplab/stats.hpp"

namespace ldplab {

/// Closed terminal events {<X_T, e_mode> >= level} and {|X_T - z| >= r}.
/// A level of +inf gives the empty event, -inf the whole space.
struct EventSpec {
    enum class Kind { half_space, ball_complement };

    Kind kind = Kind::half_space;
    double level = 0.0;
    std::size_t mode = 0;
    SpectralField centre;
    double radius = 0.0;

    static EventSpec half_space(double level, std::size_t mode = 0);
    static EventSpec ball_complement(SpectralField z, double r);

    bool contains(const SpectralField& x) const;
    TerminalTarget target() const;
};

struct ProbabilityEstimate {
    double p_hat = 0.0;
    Interval ci;
    std::size_t hits = 0;
    std::size_t n = 0;
    bool zero_hits = false;  // one-sided CI
};

/// Crude Monte Carlo over n uncontrolled paths (replicas 0..n-1 of `seed`) with a Wilson 95% CI.
ProbabilityEstimate estimate_probability(const Model& model, double epsilon, const EventSpec& event, std::size_t n,
                                         std::uint64_t seed, std::size_t steps = 100);

struct SlopeOptions {
    std::size_t steps = 100;            // simulation grid
    std::size_t pilot = 200;            // first pilot size, grown tenfold until it sees hits
    std::size_t min_pilot_hits = 5;
    std::size_t target_hits = 20;       // main runs are sized for this many expected hits
    std::size_t min_hits = 20;          // below this the report is inconclusive
    std::size_t max_paths = 1000000;
    bool compare_rate = true;
    RateOptions rate;
    std::size_t rate_intervals = 20;
};

struct SlopeReport {
    std::vector<double> eps_list;
    std::vector<double> p_hats;
    std::vector<Interval> cis;
    std::vector<std::size_t> hits;
    std::vector<std::size_t> paths;
    std::vector<double> eps_log_p;
    /// Extrapolated eps log p at eps -> 0, i.e. the estimate of -I.
    double slope = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> fit;  // coefficients of the small-eps model
    std::string fit_model;
    double rate_value = std::numeric_limits<double>::quiet_NaN();
    std::optional<ControlPair> minimizer;
    double relative_gap = std::numeric_limits<double>::quiet_NaN();
    bool inconclusive = false;
    std::string reason;
};

/// eps log p_hat per eps, with n sized by a pilot run. Three or more eps values are fitted with
/// eps log p = -I + b eps + c eps log eps (the Gaussian prefactor terms); two use a straight line.
SlopeReport ldp_slope(const Model& model, const EventSpec& event, const std::vector<double>& eps_list,
                      std::size_t n, std::uint64_t seed, const SlopeOptions& opts = {});

struct ImportanceEstimate {
    double p_hat = 0.0;
    double std_error = 0.0;
    Interval ci;
    double variance_ratio = 0.0;  // per-sample IS variance over p (1 - p)
    std::size_t hits = 0;
    std::size_t flagged = 0;
    std::size_t n = 0;
    std::vector<double> weighted;  // per-replica 1{hit} e^{-log E}
};

/// Paths simulated under the control u and reweighted by e^{-log E}. Throws FlaggedSamples
/// when more than 0.1% of the weights are infinite.
ImportanceEstimate importance_sampling_estimate(const Model& model, double epsilon, const EventSpec& event,
                                                const ControlPair& u, std::size_t n, std::uint64_t seed,
                                                std::size_t steps = 100);

struct ConvergenceTableA {
    std::vector<double> distances;  // sup_t |X^{q_n} - X^q|_H
    bool nonincreasing = true;
    double fitted_c = 0.0;          // least squares for d_n = C / n, needs `indices`
    std::vector<double> indices;
};

/// Skeleton continuity in the control. `indices` (e.g. n) label the sequence for the C/n fit.
ConvergenceTableA convergence_experiment_a(const Model& model, const std::vector<ControlPair>& q_sequence,
                                           const ControlPair& q, std::size_t steps,
                                           const std::vector<double>& indices = {});

/// q_n with f_n = (1 - 1/n) f and g_n = 1 + (1 - 1/n)(g - 1).
std::vector<ControlPair> shrinking_sequence(const ControlPair& q, const std::vector<std::size_t>& n_list);

struct ConvergenceTableB {
    std::vector<double> eps_list;
    std::vector<double> medians;
    std::vector<double> means;
    bool monotone = true;
    double ratio = 0.0;  // last median over first
    bool inconclusive = false;
};

/// Median over n paths of sup_t |X~^eps - X^u|_H on a common grid.
ConvergenceTableB convergence_experiment_b(const Model& model, const ControlPair& u,
                                           const std::vector<double>& eps_list, std::size_t n, std::uint64_t seed,
                                           std::size_t steps);

struct TightnessRow {
    double epsilon = 0.0;
    std::size_t control = 0;
    std::size_t k = 0;  // 1-based
    double mean_tail = 0.0;
    double tail_se = 0.0;
    double mean_head = 0.0;
    double envelope_c = 0.0;  // mean_tail * e^{2 zeta_k t0}
};

struct TightnessFit {
    double epsilon = 0.0;
    std::size_t control = 0;
    double slope = std::numeric_limits<double>::quiet_NaN();  // of log mean_tail against zeta_k
    double fitted_c = std::numeric_limits<double>::quiet_NaN();
    double predicted = 0.0;  // -2 t0
};

struct TightnessReport {
    double t0 = 0.0;
    std::vector<TightnessRow> rows;
    std::vector<TightnessFit> fits;
};

TightnessReport tightness_report(const Model& model, const std::vector<double>& eps_list,
                                 const std::vector<ControlPair>& u_list, const std::vector<std::size_t>& k_list,
                                 double t0, std::size_t n, std::uint64_t seed, std::size_t steps);

}  // namespace ldplab
