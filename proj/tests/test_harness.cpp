#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ldplab/config.hpp"
#include "ldplab/harness.hpp"
#include "ldplab/stats.hpp"

using namespace ldplab;

namespace {

Model scalar_ou(double a) {
    DiffusionCoefficient dc({PiecewiseConstant(1.0)}, {0.0});
    JumpCoefficient jc = JumpCoefficient::zero(1, 1);
    MarkMeasure mm(std::vector<double>{1.0});
    return Model{EigenSystem({a}), dc, jc, mm, SpectralField(1), 1.0, default_majorant(dc, jc, mm, 1.0)};
}

}  // namespace

TEST_CASE("whole and empty events", "[harness]") {
    const Model m = demo_model();
    const ProbabilityEstimate all = estimate_probability(m, 0.05, EventSpec::half_space(-INFINITY), 100, 1, 20);
    CHECK(all.p_hat == 1.0);
    const ProbabilityEstimate none = estimate_probability(m, 0.05, EventSpec::half_space(INFINITY), 100, 1, 20);
    CHECK(none.p_hat == 0.0);
    CHECK(none.zero_hits);
    CHECK(none.ci.lo == 0.0);
    CHECK(none.ci.hi > 0.0);
    CHECK_THROWS(estimate_probability(m, 0.05, EventSpec::half_space(0.0), 99, 1));
}

TEST_CASE("OU tail probability agrees with the Gaussian formula", "[harness][statistical]") {
    const Model m = scalar_ou(1.0);
    const double eps = 0.1;
    const double sd = std::sqrt(eps * (-std::expm1(-2.0)) / 2.0);
    const double a = 0.2;
    const ProbabilityEstimate p = estimate_probability(m, eps, EventSpec::half_space(a), 20000, 3, 200);
    CHECK(p.ci.contains(p.p_hat));
    CHECK(p.ci.contains(normal_sf(a / sd)));
}

TEST_CASE("non-rare event has zero slope", "[harness]") {
    const Model m = scalar_ou(1.0);
    SlopeOptions opts;
    opts.steps = 50;
    const SlopeReport r = ldp_slope(m, EventSpec::half_space(0.0), {0.1, 0.05, 0.02}, 2000, 4, opts);
    REQUIRE_FALSE(r.inconclusive);
    CHECK(std::abs(r.slope) < 0.01);
    CHECK(r.rate_value < 1e-6);
    for (std::size_t e = 0; e < r.p_hats.size(); ++e) CHECK(r.cis[e].contains(r.p_hats[e]));
}

TEST_CASE("single eps is inconclusive", "[harness]") {
    const Model m = scalar_ou(1.0);
    SlopeOptions opts;
    opts.compare_rate = false;
    const SlopeReport r = ldp_slope(m, EventSpec::half_space(0.0), {0.1}, 500, 4, opts);
    CHECK(r.inconclusive);
    CHECK_FALSE(r.reason.empty());
    CHECK_THROWS(ldp_slope(m, EventSpec::half_space(0.0), {0.05, 0.1}, 500, 4, opts));
    CHECK_THROWS(ldp_slope(m, EventSpec::half_space(0.0), {0.5, 0.1}, 500, 4, opts));
}

TEST_CASE("untilted importance sampling is crude Monte Carlo", "[harness]") {
    const Model m = demo_model();
    const EventSpec event = EventSpec::half_space(0.8);
    const ControlPair zero = ControlPair::zero(1.0, m.modes(), m.marks.size());
    const ProbabilityEstimate crude = estimate_probability(m, 0.1, event, 1000, 21, 50);
    const ImportanceEstimate is = importance_sampling_estimate(m, 0.1, event, zero, 1000, 21, 50);
    CHECK(is.hits == crude.hits);
    CHECK(is.p_hat == Catch::Approx(crude.p_hat));
    CHECK(is.flagged == 0);
}

TEST_CASE("importance sampling along the rate minimizer", "[harness][statistical]") {
    const Model m = scalar_ou(1.0);
    const EventSpec event = EventSpec::half_space(0.294);
    const RateEstimate r = minimize_rate(m, event.target(), ControlPair::constant(1.0, 20, SpectralField(1), {1.0}));
    REQUIRE_FALSE(r.infinite);

    // unbiased against crude Monte Carlo at eps = 0.1
    const ImportanceEstimate is = importance_sampling_estimate(m, 0.1, event, r.minimizer, 20000, 31, 100);
    const ProbabilityEstimate crude = estimate_probability(m, 0.1, event, 20000, 32, 100);
    CHECK(is.ci.overlaps(crude.ci));

    // variance reduction in the rare regime
    const ImportanceEstimate rare = importance_sampling_estimate(m, 0.02, event, r.minimizer, 20000, 33, 100);
    CHECK(rare.variance_ratio < 1.0);
    CHECK(rare.p_hat > 0.0);
}

TEST_CASE("skeleton continuity table", "[harness]") {
    const Model m = demo_model();
    SpectralField f(m.modes());
    f[1] = 0.6;
    const ControlPair q = ControlPair::constant(1.0, 2, f, {1.3, 0.7});

    const ConvergenceTableA same = convergence_experiment_a(m, {q, q, q}, q, 200);
    for (double d : same.distances) CHECK(d == 0.0);

    const std::vector<std::size_t> ns{1, 2, 4, 8, 16, 32};
    const ConvergenceTableA t =
        convergence_experiment_a(m, shrinking_sequence(q, ns), q, 200, std::vector<double>(ns.begin(), ns.end()));
    CHECK(t.nonincreasing);
    CHECK(t.fitted_c > 0.0);
    for (std::size_t i = 0; i < ns.size(); ++i) CHECK(t.distances[i] <= 1.5 * t.fitted_c / ns[i]);

    // alternating above and below q
    std::vector<ControlPair> crossing;
    for (std::size_t n = 1; n <= 64; n *= 2) {
        const double s = 1.0 + (n % 4 == 0 ? 1.0 : -1.0) / static_cast<double>(n);
        crossing.push_back(q.shrunk(s));
    }
    const ConvergenceTableA c = convergence_experiment_a(m, crossing, q, 200);
    CHECK(c.distances.back() < 0.05 * c.distances.front());
}

TEST_CASE("noiseless model has zero LLN distances", "[harness]") {
    const Model m = demo_model().noiseless();
    const ConvergenceTableB t =
        convergence_experiment_b(m, ControlPair::zero(1.0, m.modes(), m.marks.size()), {0.1, 0.01}, 20, 1, 100);
    // same recursion evaluated by two code paths: equal up to rounding
    for (double d : t.medians) CHECK(d < 1e-13);
}

TEST_CASE("LLN distances shrink with eps", "[harness][statistical]") {
    const Model m = demo_model();
    SpectralField f(m.modes());
    f[0] = 0.5;
    const ConvergenceTableB t =
        convergence_experiment_b(m, ControlPair::constant(1.0, 1, f, {1.5, 0.7}), {0.1, 0.01, 0.001}, 100, 2, 500);
    CHECK(t.monotone);
    CHECK(t.ratio < 1.0 / 3.0);
    CHECK(convergence_experiment_b(m, ControlPair::constant(1.0, 1, f, {1.5, 0.7}), {0.1}, 10, 2, 50).inconclusive);
}

TEST_CASE("tightness report edge cases", "[harness]") {
    const Model m = demo_model();
    const ControlPair zero = ControlPair::zero(1.0, m.modes(), m.marks.size());
    const TightnessReport r = tightness_report(m, {0.01}, {zero}, {5}, 0.3, 20, 1, 100);
    CHECK(r.rows.front().mean_tail == 0.0);
    CHECK(r.rows.front().mean_head == 0.0);
    CHECK_THROWS(tightness_report(m, {0.01}, {zero}, {6}, 0.3, 20, 1, 100));
    CHECK_THROWS(tightness_report(m, {0.01}, {zero}, {2}, 1.0, 20, 1, 100));

    Model concentrated = m;
    concentrated.x0 = SpectralField::unit(m.modes(), 0);
    const TightnessReport c = tightness_report(concentrated, {0.001}, {zero}, {1, 2}, 0.5, 50, 2, 200);
    // the energy sits in mode 1 and decays after t0; higher modes only see small noise
    CHECK(c.rows[0].mean_tail < c.rows[0].mean_head);
    CHECK(c.rows[1].mean_tail < 0.05 * c.rows[0].mean_head);
}

TEST_CASE("tail energies decrease in k along the envelope", "[harness][statistical]") {
    const Model m = demo_model();
    const ControlPair zero = ControlPair::zero(1.0, m.modes(), m.marks.size());
    const TightnessReport r = tightness_report(m, {0.01}, {zero}, {2, 3, 4}, 0.2, 300, 3, 500);
    for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].mean_tail < r.rows[i - 1].mean_tail);
    const double c = r.fits.front().fitted_c;
    for (const auto& row : r.rows)
        CHECK(row.mean_tail <= 2.0 * c * std::exp(-2.0 * m.eigen.zeta(row.k - 1) * 0.2));
    CHECK(r.fits.front().predicted == Catch::Approx(-0.4));
}
