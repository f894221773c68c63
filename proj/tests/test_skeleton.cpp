#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ldplab/config.hpp"
#include "ldplab/error.hpp"
#include "ldplab/rate.hpp"
#include "ldplab/skeleton.hpp"

using namespace ldplab;

namespace {

Model scalar(double zeta, double a, double x0, JumpCoefficient jc = JumpCoefficient::zero(1, 1)) {
    DiffusionCoefficient dc({PiecewiseConstant(a)}, {0.0});
    MarkMeasure mm(std::vector<double>{1.0});
    return Model{EigenSystem({zeta}), dc, jc, mm, SpectralField(std::vector<double>{x0}), 1.0,
                 default_majorant(dc, jc, mm, 1.0)};
}

double closed_form(double zeta, double x0, double c, double t) {
    return std::exp(-zeta * t) * x0 + c / zeta * (-std::expm1(-zeta * t));
}

}  // namespace

TEST_CASE("zero control follows the free flow", "[skeleton]") {
    const Model m = demo_model();
    const TimeGrid grid = TimeGrid::uniform(1.0, 500);
    const SkeletonSolution s = solve_skeleton(m, ControlPair::zero(1.0, m.modes(), m.marks.size()), grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        worst = std::max(worst, (s.trajectory[i] - semigroup_apply(m.eigen, grid[i], m.x0)).h_norm());
    CHECK(worst < 1e-12);
}

TEST_CASE("constant Gaussian forcing matches the linear ODE", "[skeleton]") {
    const Model m = scalar(1.0, 2.0, 1.0);
    const double c = 0.8;
    const ControlPair q = ControlPair::constant(1.0, 1, SpectralField(std::vector<double>{c / 2.0}), {1.0});
    const TimeGrid grid = TimeGrid::uniform(1.0, 10000);
    const SkeletonSolution s = solve_skeleton(m, q, grid);
    for (std::size_t i = 0; i < grid.size(); i += 100)
        CHECK(std::abs(s.trajectory[i][0] - closed_form(1.0, 1.0, c, grid[i])) < 1e-6);
}

TEST_CASE("constant jump tilt matches the linear ODE", "[skeleton]") {
    // G = 0.3 e_1, g = 2, nu = 1: forcing 0.3
    const JumpCoefficient jc({JumpLaw{PiecewiseConstant(1.0), 0.3, 0.0, SpectralField::unit(1, 0)}});
    Model m = scalar(1.0, 0.0, -0.5, jc);
    const ControlPair q = ControlPair::constant(1.0, 1, SpectralField(1), {2.0});
    const TimeGrid grid = TimeGrid::uniform(1.0, 10000);
    const SkeletonSolution s = solve_skeleton(m, q, grid);
    for (std::size_t i = 0; i < grid.size(); i += 100)
        CHECK(std::abs(s.trajectory[i][0] - closed_form(1.0, -0.5, 0.3, grid[i])) < 1e-6);
}

TEST_CASE("state-independent coefficients converge after one correction", "[skeleton]") {
    const Model m = scalar(2.0, 1.0, 1.0);
    const ControlPair q = ControlPair::constant(1.0, 1, SpectralField(std::vector<double>{0.7}), {1.0});
    SkeletonOptions opts;
    opts.tol = 1e-30;
    const SkeletonSolution s = solve_skeleton(m, q, TimeGrid::uniform(1.0, 100), opts);
    REQUIRE(s.sup_residuals.size() >= 2);
    CHECK(s.sup_residuals[1] == 0.0);
}

TEST_CASE("demo Picard residuals contract factorially", "[skeleton]") {
    const Model m = demo_model();
    SpectralField f(m.modes());
    f[0] = 0.5;
    const ControlPair q = ControlPair::constant(1.0, 1, f, {1.5, 0.7});
    SkeletonOptions opts;
    opts.tol = 1e-24;
    const SkeletonSolution s = solve_skeleton(m, q, TimeGrid::uniform(1.0, 1000), opts);
    const PicardDiagnostics d = picard_diagnostics(s);
    // early ratios reflect the initial guess; the factorial regime shows in the last five
    CHECK(d.ratios_decreasing);
    CHECK(d.ratios.size() >= 6);
    CHECK(d.last_ratio < 0.01);

    Model longer = m;
    longer.horizon = 2.0;
    const ControlPair q2 = ControlPair::constant(2.0, 1, f, {1.5, 0.7});
    const SkeletonSolution s2 = solve_skeleton(longer, q2, TimeGrid::uniform(2.0, 2000), opts);
    CHECK(picard_diagnostics(s2).fitted_constant > d.fitted_constant);
}

TEST_CASE("Picard budget exhaustion carries the residual history", "[skeleton]") {
    const Model m = demo_model();
    SkeletonOptions opts;
    opts.tol = 1e-40;
    opts.max_iter = 3;
    try {
        solve_skeleton(m, ControlPair::constant(1.0, 1, SpectralField(m.modes()), {2.0, 2.0}),
                       TimeGrid::uniform(1.0, 100), opts);
        FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
        CHECK(e.history().size() == 3);
    }
}

TEST_CASE("a-priori bound dominates random controls in the cost ball", "[skeleton][property]") {
    const Model m = demo_model();
    const AprioriBound b = apriori_bound(m, 1.0);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<SpectralField> f(5, SpectralField(m.modes()));
        std::vector<std::vector<double>> g(5, std::vector<double>(m.marks.size()));
        for (auto& fi : f)
            for (std::size_t k = 0; k < m.modes(); ++k) fi[k] = normal(rng);
        for (auto& gi : g)
            for (double& v : gi) v = std::exp(normal(rng));
        ControlPair q(TimeGrid::uniform(1.0, 5), f, g);
        const double c = cost_of_control(q, m.marks).total;
        if (c > 1.0) q = q.shrunk(std::sqrt(1.0 / c) * 0.5);
        REQUIRE(cost_of_control(q, m.marks).total <= 1.0);
        const SkeletonSolution s = solve_skeleton(m, q, TimeGrid::uniform(1.0, 200));
        CHECK(s.sup_h2 <= b.sup_h2);
        CHECK(s.sup_h2 + s.integral_v2 <= b.with_energy);
    }
}

TEST_CASE("a-priori bound covers trivial cases", "[skeleton]") {
    const Model m = demo_model();
    CHECK(apriori_bound(m, 0.0).sup_h2 >= m.x0.h_norm_squared());

    Model still = m;
    still.x0 = SpectralField(m.modes());
    still.diffusion = DiffusionCoefficient::zero(m.modes());
    still.jumps = JumpCoefficient::zero(m.modes(), m.marks.size());
    const SkeletonSolution s =
        solve_skeleton(still, ControlPair::zero(1.0, m.modes(), m.marks.size()), TimeGrid::uniform(1.0, 50));
    CHECK(s.sup_h2 == 0.0);
    CHECK(apriori_bound(still, 1.0).sup_h2 >= 0.0);
}
