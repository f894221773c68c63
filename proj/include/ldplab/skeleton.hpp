#pragma once

#include <cstddef>
#include <vector>

#include "ldplab/coefficients.hpp"
#include "ldplab/control.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/spectral.hpp"

namespace ldplab {

struct SkeletonOptions {
    /// Stop once sup_t |Y_n - Y_{n-1}|_H^2 <= tol; a value <= 0 selects (max step)^2.
    double tol = 0.0;
    std::size_t max_iter = 100;
    enum class InitialGuess { initial_state, zero } initial_guess = InitialGuess::initial_state;
};

struct SkeletonSolution {
    std::vector<double> times;
    std::vector<SpectralField> trajectory;
    std::size_t iterations = 0;
    /// a_n = sup_t |Y_n - Y_{n-1}|_H^2 for n = 1..iterations
    std::vector<double> sup_residuals;
    double sup_h2 = 0.0;         // sup_t |X_t|_H^2
    double integral_v2 = 0.0;    // int_0^T |X_t|_V^2 dt (left rectangles)
    double tol = 0.0;

    const SpectralField& terminal() const { return trajectory.back(); }
};

/// Controlled skeleton equation by Picard iteration; each iterate is a linear solve with
/// per-mode exponential Euler and forcing sigma(Y_{n-1}) f + sum_j G(Y_{n-1}, v_j)(g_j - 1) nu_j
/// evaluated at the left end of each step. Throws NonConvergence after max_iter sweeps.
SkeletonSolution solve_skeleton(const Model& model, const ControlPair& q, const SpectralField& x0,
                                const TimeGrid& grid, const SkeletonOptions& opts = {});
SkeletonSolution solve_skeleton(const Model& model, const ControlPair& q, const TimeGrid& grid,
                                const SkeletonOptions& opts = {});

/// One linear sweep: x' = -A x + forcing(t, Y_prev) with Y_prev given on the grid.
std::vector<SpectralField> linear_sweep(const Model& model, const ControlPair& q, const SpectralField& x0,
                                        const TimeGrid& grid, const std::vector<SpectralField>& previous);

/// sigma(t, y) f(t) + sum_j G(t, y, v_j)(g(t, v_j) - 1) nu_j; coefficient tables read at `t_table`.
SpectralField skeleton_forcing(const Model& model, const ControlPair& q, double t_table, const SpectralField& y);

struct PicardDiagnostics {
    std::vector<double> residuals;  // a_1..a_n
    std::vector<double> ratios;     // a_{n+1} / a_n
    /// Smallest C with a_{n+1} <= C^n / n! * a_1 for every recorded n.
    double envelope_constant = 0.0;
    /// Least-squares slope of log(a_{n+1} n! / a_1) against n, exponentiated.
    double fitted_constant = 0.0;
    bool ratios_decreasing = false;  // over the last (up to) five ratios
    double last_ratio = 0.0;
};

/// Requires at least three Picard sweeps.
PicardDiagnostics picard_diagnostics(const SkeletonSolution& sol);

struct AprioriBound {
    double sup_h2 = 0.0;       // bound on sup_t |X_t|_H^2
    double with_energy = 0.0;  // bound on sup_t |X_t|_H^2 + int_0^T |X_t|_V^2
    double prefactor = 0.0;
    double exponent = 0.0;
};

/// Gronwall bound for every skeleton with cost components <= budget:
/// sup |X|^2 <= (|X0|^2 + int K + B) exp(lambda0 T + int K + 2 N + 3 B), B the C^N_{0,1} bound.
AprioriBound apriori_bound(const Model& model, double budget, double sigma = 1.0);

}  // namespace ldplab
