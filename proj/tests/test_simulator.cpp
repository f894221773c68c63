#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ldplab/config.hpp"
#include "ldplab/error.hpp"
#include "ldplab/simulator.hpp"
#include "ldplab/skeleton.hpp"
#include "ldplab/stats.hpp"

using namespace ldplab;

namespace {

Model scalar_ou(double a, double horizon, double x0 = 0.0) {
    DiffusionCoefficient dc({PiecewiseConstant(1.0)}, {0.0});
    JumpCoefficient jc = JumpCoefficient::zero(1, 1);
    MarkMeasure mm(std::vector<double>{1.0});
    return Model{EigenSystem({a}), dc, jc, mm, SpectralField(std::vector<double>{x0}), horizon,
                 default_majorant(dc, jc, mm, horizon)};
}

Model pure_jump(double gamma, double lambda, double x0) {
    DiffusionCoefficient dc = DiffusionCoefficient::zero(1);
    JumpCoefficient jc({JumpLaw{PiecewiseConstant(1.0), gamma, 0.0, SpectralField::unit(1, 0)}});
    MarkMeasure mm(std::vector<double>{lambda});
    return Model{EigenSystem({1.0}), dc, jc, mm, SpectralField(std::vector<double>{x0}), 1.0,
                 default_majorant(dc, jc, mm, 1.0)};
}

SimOptions lean() {
    SimOptions o;
    o.keep_states = false;
    o.keep_noise = false;
    return o;
}

}  // namespace

TEST_CASE("noiseless simulation equals the zero-control skeleton", "[simulator]") {
    Model m = demo_model().noiseless();
    const TimeGrid grid = TimeGrid::uniform(1.0, 200);
    const SdePath p = simulate_uncontrolled(m, 0.01, m.x0, grid, 1);
    const SkeletonSolution s = solve_skeleton(m, ControlPair::zero(1.0, m.modes(), m.marks.size()), grid);
    CHECK(sup_distance(p.states, s.trajectory) < 1e-13);
}

TEST_CASE("same seed gives the same path", "[simulator]") {
    const Model m = demo_model();
    const TimeGrid grid = TimeGrid::uniform(1.0, 100);
    const SdePath a = simulate_uncontrolled(m, 0.05, m.x0, grid, 12, 3);
    const SdePath b = simulate_uncontrolled(m, 0.05, m.x0, grid, 12, 3);
    CHECK(a.states == b.states);
    CHECK(a.increments == b.increments);
    CHECK(a.jump_count == b.jump_count);
    CHECK_FALSE(simulate_uncontrolled(m, 0.05, m.x0, grid, 12, 4).terminal == a.terminal);
}

TEST_CASE("jump displacements equal eps G at the pre-jump state", "[simulator]") {
    const Model m = demo_model();
    const double eps = 0.05;
    const SdePath p = simulate_uncontrolled(m, eps, m.x0, TimeGrid::uniform(1.0, 100), 5);
    REQUIRE(p.jumps.size() > 10);
    for (const AppliedJump& j : p.jumps) {
        const SpectralField g = eps * m.jumps.evaluate(j.time, j.pre, j.mark);
        CHECK((g - j.displacement).h_norm() < 1e-15);
    }
}

TEST_CASE("OU stationary variance", "[simulator][statistical]") {
    const double a = 2.0, eps = 0.1;
    const Model m = scalar_ou(a, 3.0);
    const TimeGrid grid = TimeGrid::uniform(3.0, 3000);
    const std::size_t n = 10000;
    RunningStats x, x2;
    for (std::size_t r = 0; r < n; ++r) {
        const double v = simulate_uncontrolled(m, eps, m.x0, grid, 77, r, lean()).terminal[0];
        x.add(v);
        x2.add(v * v);
    }
    const double exact = eps * (-std::expm1(-2.0 * a * 3.0)) / (2.0 * a);
    CHECK(std::abs(x.mean()) < 4.0 * x.std_error());
    CHECK(std::abs(x2.mean() - exact) < 4.0 * x2.std_error());
    CHECK(std::abs(exact - eps / (2.0 * a)) < 1e-4);
}

TEST_CASE("compensated jumps have the skeleton as mean path", "[simulator][statistical]") {
    const Model m = pure_jump(0.5, 3.0, 1.0);
    const double eps = 0.2;
    const TimeGrid grid = TimeGrid::uniform(1.0, 100);
    const SkeletonSolution s = solve_skeleton(m, ControlPair::zero(1.0, 1, 1), grid);
    const std::size_t n = 10000;
    RunningStats mid, end;
    for (std::size_t r = 0; r < n; ++r) {
        const SdePath p = simulate_uncontrolled(m, eps, m.x0, grid, 91, r);
        mid.add(p.states[50][0]);
        end.add(p.terminal[0]);
    }
    CHECK(std::abs(mid.mean() - s.trajectory[50][0]) < 4.0 * mid.std_error());
    CHECK(std::abs(end.mean() - s.terminal()[0]) < 4.0 * end.std_error());
}

TEST_CASE("zero control leaves the law unchanged", "[simulator][statistical]") {
    const Model m = demo_model();
    const ControlPair u = ControlPair::zero(1.0, m.modes(), m.marks.size());
    const TimeGrid grid = TimeGrid::uniform(1.0, 100);
    std::vector<double> a, b;
    for (std::size_t r = 0; r < 10000; ++r) {
        a.push_back(simulate_uncontrolled(m, 0.1, m.x0, grid, 101, r, lean()).terminal.h_norm());
        const SdePath c = simulate_controlled(m, 0.1, u, m.x0, grid, 102, r, lean());
        CHECK(c.log_weight == 0.0);
        b.push_back(c.terminal.h_norm());
    }
    CHECK(ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("zero control has zero Girsanov weight on any path", "[simulator]") {
    const Model m = demo_model();
    const ControlPair u = ControlPair::zero(1.0, m.modes(), m.marks.size());
    for (std::uint64_t r = 0; r < 20; ++r) {
        const SdePath p = simulate_uncontrolled(m, 0.1, m.x0, TimeGrid::uniform(1.0, 50), 7, r);
        CHECK(girsanov_log_weight(p, u, m.marks, 0.1) == 0.0);
    }
}

TEST_CASE("stored log weight matches the recomputed one", "[simulator]") {
    const Model m = demo_model();
    SpectralField f(m.modes());
    f[0] = 0.4;
    f[2] = -0.2;
    const ControlPair u = ControlPair::constant(1.0, 4, f, {1.7, 0.6});
    for (std::uint64_t r = 0; r < 20; ++r) {
        const SdePath p = simulate_controlled(m, 0.1, u, m.x0, TimeGrid::uniform(1.0, 50), 8, r);
        CHECK(p.log_weight == Catch::Approx(girsanov_log_weight(p, u, m.marks, 0.1)).epsilon(1e-12));
    }
}

TEST_CASE("jump tilt weight is a martingale", "[simulator][statistical]") {
    const Model m = pure_jump(0.3, 1.0, 0.0);
    const ControlPair u = ControlPair::constant(1.0, 1, SpectralField(1), {2.0});
    const std::size_t n = 100000;
    RunningStats e;
    for (std::size_t r = 0; r < n; ++r) {
        const SdePath p = simulate_uncontrolled(m, 1.0, m.x0, TimeGrid::uniform(1.0, 4), 13, r);
        e.add(std::exp(girsanov_log_weight(p, u, m.marks, 1.0)));
    }
    CHECK(std::abs(e.mean() - 1.0) < 4.0 * e.std_error());
}

TEST_CASE("Gaussian tilt weight is lognormal", "[simulator][statistical]") {
    const Model m = scalar_ou(1.0, 1.0);
    const double psi = 0.2, eps = 0.1;
    const ControlPair u = ControlPair::constant(1.0, 1, SpectralField(std::vector<double>{psi}), {1.0});
    const std::size_t n = 100000;
    RunningStats e, centred2;
    for (std::size_t r = 0; r < n; ++r) {
        const SdePath p = simulate_uncontrolled(m, eps, m.x0, TimeGrid::uniform(1.0, 10), 14, r);
        const double w = std::exp(girsanov_log_weight(p, u, m.marks, eps));
        e.add(w);
        centred2.add((w - 1.0) * (w - 1.0));
    }
    CHECK(std::abs(e.mean() - 1.0) < 4.0 * e.std_error());
    CHECK(std::abs(centred2.mean() - std::expm1(psi * psi / eps)) < 4.0 * centred2.std_error());
}

TEST_CASE("additive Gaussian control shifts the mean onto the skeleton", "[simulator][statistical]") {
    const Model m = scalar_ou(1.0, 1.0, 0.5);
    const ControlPair u = ControlPair::constant(1.0, 1, SpectralField(std::vector<double>{0.8}), {1.0});
    const TimeGrid grid = TimeGrid::uniform(1.0, 100);
    const double target = solve_skeleton(m, u, grid).terminal()[0];
    RunningStats x;
    for (std::size_t r = 0; r < 10000; ++r) x.add(simulate_controlled(m, 0.05, u, m.x0, grid, 15, r, lean()).terminal[0]);
    CHECK(std::abs(x.mean() - target) < 4.0 * x.std_error());
}

TEST_CASE("reweighted controlled samples reproduce uncontrolled expectations", "[simulator][statistical]") {
    const Model m = demo_model();
    SpectralField f(m.modes());
    f[0] = 0.3;
    const ControlPair u = ControlPair::constant(1.0, 2, f, {1.4, 0.8});
    const TimeGrid grid = TimeGrid::uniform(1.0, 50);
    const double eps = 0.1;
    auto functional = [](const SpectralField& x) { return std::tanh(3.0 * (x[0] - 0.7)); };
    RunningStats plain, weighted;
    for (std::size_t r = 0; r < 20000; ++r) {
        plain.add(functional(simulate_uncontrolled(m, eps, m.x0, grid, 16, r, lean()).terminal));
        const SdePath c = simulate_controlled(m, eps, u, m.x0, grid, 17, r, lean());
        weighted.add(functional(c.terminal) * std::exp(-c.log_weight));
    }
    const double se = std::hypot(plain.std_error(), weighted.std_error());
    CHECK(std::abs(plain.mean() - weighted.mean()) < 4.0 * se);
}

TEST_CASE("second moments stay bounded as eps decreases", "[simulator][statistical]") {
    const Model m = demo_model();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    const TimeGrid grid = TimeGrid::uniform(1.0, 200);
    for (int c = 0; c < 5; ++c) {
        SpectralField f(m.modes());
        for (std::size_t k = 0; k < m.modes(); ++k) f[k] = 0.5 * normal(rng);
        const ControlPair u = ControlPair::constant(1.0, 1, f, {std::exp(0.5 * normal(rng)), std::exp(0.5 * normal(rng))});
        std::vector<double> means;
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            RunningStats s;
            for (std::size_t r = 0; r < 100; ++r) s.add(simulate_controlled(m, eps, u, m.x0, grid, 18, r, lean()).sup_h2);
            means.push_back(s.mean());
        }
        CHECK(*std::max_element(means.begin(), means.end()) <= 2.0 * *std::min_element(means.begin(), means.end()));
    }
}

TEST_CASE("tail energy edge cases", "[simulator]") {
    const Model m = demo_model();
    const SdePath p = simulate_uncontrolled(m, 0.01, m.x0, TimeGrid::uniform(1.0, 100), 3);
    const auto [head, tail] = tail_energy(p, m.modes() + 1, 0.3);
    CHECK(head == 0.0);
    CHECK(tail == 0.0);
    CHECK_THROWS(tail_energy(p, 0, 0.3));

    Model quiet = m.noiseless();
    quiet.x0 = SpectralField::unit(m.modes(), 0);
    const SdePath q = simulate_uncontrolled(quiet, 0.01, quiet.x0, TimeGrid::uniform(1.0, 100), 3);
    CHECK(tail_energy(q, 2, 0.3).second == 0.0);
    CHECK(tail_energy(q, 1, 0.0).first == Catch::Approx(1.0));
}

TEST_CASE("head energy shrinks to the initial tail as t0 decreases", "[simulator][statistical]") {
    const Model m = demo_model();
    const TimeGrid grid = TimeGrid::uniform(1.0, 500);
    std::vector<SdePath> paths;
    for (std::size_t r = 0; r < 200; ++r) paths.push_back(simulate_uncontrolled(m, 0.01, m.x0, grid, 19, r));
    double initial = 0.0;
    for (std::size_t k = 1; k < m.modes(); ++k) initial += m.x0[k] * m.x0[k];
    double previous = INFINITY;
    for (double t0 : {0.4, 0.1, 0.02, 0.0}) {
        RunningStats head;
        for (const auto& p : paths) head.add(tail_energy(p, 2, t0).first);
        CHECK(head.mean() <= previous);
        previous = head.mean();
    }
    CHECK(previous == Catch::Approx(initial));
}

TEST_CASE("blow-up guard aborts with a diagnostic", "[simulator]") {
    Model m = demo_model();
    m.x0 = 1e9 * SpectralField::unit(m.modes(), 0);
    CHECK_THROWS_AS(simulate_uncontrolled(m, 0.01, m.x0, TimeGrid::uniform(1.0, 10), 1), BlowUp);
}
