#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ldplab/coefficients.hpp"
#include "ldplab/control.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/skeleton.hpp"

namespace ldplab {

/// r log r - r + 1, with ell(0) = 1.
double ell(double r);

struct CostReport {
    double tilde_cost = 0.0;  // 1/2 int |f|_H^2
    double jump_cost = 0.0;   // int sum_j ell(g) nu_j
    double total = 0.0;
};

/// Exact on the control partition.
CostReport cost_of_control(const ControlPair& q, const MarkMeasure& mm);
/// Same, after checking that the control covers exactly [0, grid horizon].
CostReport cost_of_control(const ControlPair& q, const MarkMeasure& mm, const TimeGrid& grid);

/// Closed ball: tilde cost <= N and jump cost <= N.
bool in_cost_ball(const ControlPair& q, const MarkMeasure& mm, double budget);

/// Closed terminal set in H; distance() is the H-distance from a point to the set.
struct TerminalTarget {
    enum class Kind { point, ball, half_space, ball_complement };

    Kind kind = Kind::point;
    SpectralField centre;  // point, ball, ball_complement
    double radius = 0.0;   // ball, ball_complement
    double level = 0.0;    // half_space: <x, e_mode> >= level
    std::size_t mode = 0;  // 0-based

    static TerminalTarget point(SpectralField z);
    static TerminalTarget ball(SpectralField z, double r);
    static TerminalTarget half_space(double level, std::size_t mode = 0);
    static TerminalTarget ball_complement(SpectralField z, double r);

    double distance(const SpectralField& x) const;
    bool contains(const SpectralField& x) const { return distance(x) <= 0.0; }
};

struct RateOptions {
    std::size_t steps = 200;                          // skeleton grid
    std::vector<double> penalties{1e1, 1e2, 1e3, 1e4};
    std::size_t max_iter = 300;                       // per penalty stage
    double fd_step = 1e-5;                            // relative
    double grad_tol = 1e-8;
    double residual_tol = 1e-3;
    std::size_t memory = 10;                          // L-BFGS history
    bool optimize_f = true;
    bool optimize_g = true;
    double skeleton_tol = 1e-26;
    std::size_t skeleton_max_iter = 200;
};

struct RateStage {
    double penalty = 0.0;
    std::size_t iterations = 0;
    double objective = 0.0;
    double cost = 0.0;
    double residual = 0.0;
    double grad_norm = 0.0;
    bool stationary = false;
};

struct RateEstimate {
    double value = 0.0;  // +inf when the target is out of reach
    bool infinite = false;
    ControlPair minimizer = ControlPair::zero(1.0, 1, 1);
    CostReport cost;
    double penalty_residual = 0.0;
    SpectralField terminal;
    std::vector<RateStage> trace;
    std::size_t evaluations = 0;
};

/// Penalised minimisation of cost(q) + mu dist^2(skeleton(q)_T, target) with continuation in mu.
/// Parameters are the f values and theta = log(g - g_min) on the partition of `init`; modes with
/// sigma == 0 and marks with G == 0 keep f = 0 and g = 1. Gradients by central differences,
/// steps by L-BFGS with Armijo backtracking. Returns an infinite value when the residual at the
/// last penalty stays above residual_tol at a stationary point; throws NonConvergence when the
/// iteration budget runs out first.
RateEstimate minimize_rate(const Model& model, const TerminalTarget& target, const ControlPair& init,
                           const RateOptions& opts = {});

/// Terminal state of the skeleton for q on a uniform grid with `steps` steps.
SpectralField skeleton_terminal(const Model& model, const ControlPair& q, std::size_t steps,
                                const SkeletonOptions& sk = {});

}  // namespace ldplab
