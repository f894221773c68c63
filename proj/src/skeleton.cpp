#include "ldplab/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ldplab/error.hpp"

namespace ldplab {

SpectralField skeleton_forcing(const Model& model, const ControlPair& q, double t_table, const SpectralField& y) {
    SpectralField out = model.diffusion.apply(t_table, y, q.f_at(t_table));
    for (std::size_t j = 0; j < model.marks.size(); ++j) {
        const double tilt = (q.g_at(t_table, j) - 1.0) * model.marks.weight(j);
        if (tilt != 0.0) model.jumps.accumulate(t_table, y, j, tilt, out);
    }
    return out;
}

namespace {

void check_inputs(const Model& model, const ControlPair& q, const SpectralField& x0, const TimeGrid& grid) {
    if (grid.steps() < 2) throw std::invalid_argument("solve_skeleton: grid needs at least 2 steps");
    if (q.modes() != model.modes()) throw std::invalid_argument("solve_skeleton: control f has wrong mode count");
    if (q.marks() != model.marks.size()) throw std::invalid_argument("solve_skeleton: control g has wrong mark count");
    if (x0.size() != model.modes()) throw std::invalid_argument("solve_skeleton: x0 has wrong mode count");
    if (std::abs(grid.horizon() - q.horizon()) > 1e-12 * grid.horizon())
        throw std::invalid_argument("solve_skeleton: control horizon differs from grid horizon");
}

/// e^{-zeta_k dt} and (1 - e^{-zeta_k dt}) / zeta_k per step; a uniform grid shares one row.
struct StepFactors {
    bool uniform = true;
    std::vector<double> decay;
    std::vector<double> gain;
    std::size_t modes = 0;

    StepFactors(const EigenSystem& eig, const TimeGrid& grid) : modes(eig.modes()) {
        const double h0 = grid.step(0);
        for (std::size_t m = 1; m < grid.steps(); ++m)
            if (std::abs(grid.step(m) - h0) > 1e-12 * h0) uniform = false;
        const std::size_t rows = uniform ? 1 : grid.steps();
        decay.resize(rows * modes);
        gain.resize(rows * modes);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = 0; k < modes; ++k) {
                decay[r * modes + k] = std::exp(-eig.zeta(k) * grid.step(r));
                gain[r * modes + k] = phi1(eig.zeta(k), grid.step(r));
            }
    }
    double d(std::size_t m, std::size_t k) const { return decay[(uniform ? 0 : m) * modes + k]; }
    double g(std::size_t m, std::size_t k) const { return gain[(uniform ? 0 : m) * modes + k]; }
};

std::vector<SpectralField> sweep(const Model& model, const ControlPair& q, const SpectralField& x0,
                                 const TimeGrid& grid, const StepFactors& fac,
                                 const std::vector<SpectralField>& previous) {
    std::vector<SpectralField> next(grid.size());
    next[0] = x0;
    for (std::size_t m = 0; m < grid.steps(); ++m) {
        const double mid = 0.5 * (grid[m] + grid[m + 1]);
        const SpectralField force = skeleton_forcing(model, q, mid, previous[m]);
        SpectralField x(model.modes());
        for (std::size_t k = 0; k < model.modes(); ++k)
            x[k] = fac.d(m, k) * next[m][k] + fac.g(m, k) * force[k];
        next[m + 1] = std::move(x);
    }
    return next;
}

}  // namespace

std::vector<SpectralField> linear_sweep(const Model& model, const ControlPair& q, const SpectralField& x0,
                                        const TimeGrid& grid, const std::vector<SpectralField>& previous) {
    if (previous.size() != grid.size()) throw std::invalid_argument("linear_sweep: previous iterate has wrong length");
    return sweep(model, q, x0, grid, StepFactors(model.eigen, grid), previous);
}

SkeletonSolution solve_skeleton(const Model& model, const ControlPair& q, const SpectralField& x0,
                                const TimeGrid& grid, const SkeletonOptions& opts) {
    check_inputs(model, q, x0, grid);
    double max_step = 0.0;
    for (std::size_t m = 0; m < grid.steps(); ++m) max_step = std::max(max_step, grid.step(m));
    const double tol = opts.tol > 0.0 ? opts.tol : max_step * max_step;

    const StepFactors fac(model.eigen, grid);
    const SpectralField start =
        opts.initial_guess == SkeletonOptions::InitialGuess::zero ? SpectralField(model.modes()) : x0;
    std::vector<SpectralField> current(grid.size(), start);

    SkeletonSolution sol;
    sol.tol = tol;
    sol.times = grid.nodes();
    for (std::size_t n = 1; n <= opts.max_iter; ++n) {
        std::vector<SpectralField> next = sweep(model, q, x0, grid, fac, current);
        double a = 0.0;
        for (std::size_t m = 0; m < grid.size(); ++m) a = std::max(a, (next[m] - current[m]).h_norm_squared());
        if (!std::isfinite(a)) throw NonConvergence("solve_skeleton: iterate became non-finite", sol.sup_residuals);
        sol.sup_residuals.push_back(a);
        current = std::move(next);
        sol.iterations = n;
        if (a <= tol) break;
        if (n == opts.max_iter)
            throw NonConvergence("solve_skeleton: no convergence after " + std::to_string(n) +
                                     " Picard sweeps (last residual " + std::to_string(a) + ")",
                                 sol.sup_residuals);
    }
    sol.trajectory = std::move(current);
    for (std::size_t m = 0; m < grid.size(); ++m) {
        sol.sup_h2 = std::max(sol.sup_h2, sol.trajectory[m].h_norm_squared());
        if (m + 1 < grid.size()) sol.integral_v2 += model.eigen.v_norm_squared(sol.trajectory[m]) * grid.step(m);
    }
    return sol;
}

SkeletonSolution solve_skeleton(const Model& model, const ControlPair& q, const TimeGrid& grid,
                                const SkeletonOptions& opts) {
    return solve_skeleton(model, q, model.x0, grid, opts);
}

PicardDiagnostics picard_diagnostics(const SkeletonSolution& sol) {
    if (sol.sup_residuals.size() < 3)
        throw std::invalid_argument("picard_diagnostics: need at least 3 Picard sweeps");
    PicardDiagnostics d;
    d.residuals = sol.sup_residuals;
    const auto& a = d.residuals;
    for (std::size_t n = 1; n < a.size(); ++n) d.ratios.push_back(a[n - 1] > 0.0 ? a[n] / a[n - 1] : 0.0);
    d.last_ratio = d.ratios.back();

    const std::size_t tail = std::min<std::size_t>(5, d.ratios.size());
    d.ratios_decreasing = true;
    for (std::size_t i = d.ratios.size() - tail + 1; i < d.ratios.size(); ++i)
        if (!(d.ratios[i] <= d.ratios[i - 1])) d.ratios_decreasing = false;

    // a_{n+1} <= C^n / n! * a_1, n >= 1
    const double a1 = a[0];
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t used = 0;
    double log_fact = 0.0;
    for (std::size_t n = 1; n < a.size(); ++n) {
        log_fact += std::log(static_cast<double>(n));
        if (!(a[n] > 0.0) || !(a1 > 0.0)) continue;
        const double y = std::log(a[n] / a1) + log_fact;  // n log C
        d.envelope_constant = std::max(d.envelope_constant, std::exp(y / static_cast<double>(n)));
        const double x = static_cast<double>(n);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++used;
    }
    if (used >= 2) {
        const double denom = static_cast<double>(used) * sxx - sx * sx;
        d.fitted_constant = std::exp((static_cast<double>(used) * sxy - sx * sy) / denom);
    } else if (used == 1) {
        d.fitted_constant = d.envelope_constant;
    }
    return d;
}

AprioriBound apriori_bound(const Model& model, double budget, double sigma) {
    if (!(budget >= 0.0)) throw std::invalid_argument("apriori_bound: budget must be >= 0");
    const Lemma34Bounds b = lemma34_bounds(model, budget, sigma);
    const double int_k = model.majorant.integrate([](double v) { return v; }, model.horizon);
    const double b01 = b.c_1[0];

    AprioriBound out;
    out.prefactor = model.x0.h_norm_squared() + int_k + b01;
    out.exponent = model.eigen.lambda0() * model.horizon + int_k + 2.0 * budget + 3.0 * b01;
    out.sup_h2 = out.prefactor * std::exp(out.exponent);
    out.with_energy = out.sup_h2 + (out.prefactor + out.sup_h2 * out.exponent) / model.eigen.alpha();
    return out;
}

}  // namespace ldplab
