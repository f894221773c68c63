#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ldplab/parallel.hpp"
#include "ldplab/stats.hpp"

using namespace ldplab;
using Catch::Approx;

TEST_CASE("running stats match two-pass formulas and merge", "[stats]") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(2.0, 3.0);
    std::vector<double> xs(1000);
    for (double& x : xs) x = normal(rng);
    RunningStats all, left, right;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        all.add(xs[i]);
        (i < 400 ? left : right).add(xs[i]);
    }
    double mean = 0.0;
    for (double x : xs) mean += x / xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean) / (xs.size() - 1);
    CHECK(all.mean() == Approx(mean).epsilon(1e-12));
    CHECK(all.variance() == Approx(var).epsilon(1e-12));
    left.merge(right);
    CHECK(left.mean() == Approx(all.mean()).epsilon(1e-12));
    CHECK(left.variance() == Approx(all.variance()).epsilon(1e-10));
    CHECK(left.count() == 1000);
}

TEST_CASE("normal helpers", "[stats]") {
    CHECK(normal_cdf(0.0) == Approx(0.5));
    CHECK(normal_sf(1.959963984540054) == Approx(0.025).epsilon(1e-10));
    CHECK(normal_sf(10.0) == Approx(7.61985302416047e-24).epsilon(1e-8));
    CHECK(normal_quantile(0.975) == Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("Wilson interval", "[stats]") {
    const Interval w = wilson_interval(50, 100);
    // textbook values for 50 / 100
    CHECK(w.lo == Approx(0.4038).margin(1e-4));
    CHECK(w.hi == Approx(0.5962).margin(1e-4));
    const Interval z = wilson_interval(0, 100);
    CHECK(z.lo == 0.0);
    CHECK(z.hi == Approx(1.0 - std::pow(0.05, 0.01)));
    for (std::size_t h : {0u, 1u, 7u, 100u}) CHECK(wilson_interval(h, 100).contains(h / 100.0));
}

TEST_CASE("chi-square against known statistic", "[stats]") {
    // 3 equiprobable bins with counts 10, 20, 30: statistic 10, two degrees of freedom
    const ChiSquareResult r = chi_square_gof({10, 20, 30}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    CHECK(r.statistic == Approx(10.0));
    CHECK(r.dof == 2);
    CHECK(r.p_value == Approx(std::exp(-5.0)).epsilon(1e-10));
}

TEST_CASE("Kolmogorov-Smirnov separates shifted samples", "[stats]") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    std::vector<double> a(2000), b(2000), c(2000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = normal(rng);
        b[i] = normal(rng);
        c[i] = normal(rng) + 0.3;
    }
    CHECK(ks_two_sample(a, b).p_value > 0.01);
    CHECK(ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("least squares recovers exact coefficients", "[stats]") {
    const LinearFit f = linear_fit({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
    CHECK(f.slope == Approx(2.0));
    CHECK(f.intercept == Approx(1.0));
    CHECK(f.r2 == Approx(1.0));

    std::vector<double> design, y;
    for (double x : {0.1, 0.5, 1.0, 2.0}) {
        design.insert(design.end(), {1.0, x, x * x});
        y.push_back(0.5 - x + 2.0 * x * x);
    }
    const auto beta = least_squares(design, 3, y);
    CHECK(beta[0] == Approx(0.5));
    CHECK(beta[1] == Approx(-1.0));
    CHECK(beta[2] == Approx(2.0));
    CHECK(median({3.0, 1.0, 2.0, 10.0}) == 2.5);
}

TEST_CASE("parallel loops are thread-count independent", "[stats]") {
    std::vector<double> one(1000), four(1000);
    set_worker_threads(1);
    parallel_for(one.size(), [&](std::size_t i) { one[i] = std::sin(static_cast<double>(i)); });
    set_worker_threads(4);
    parallel_for(four.size(), [&](std::size_t i) { four[i] = std::sin(static_cast<double>(i)); });
    CHECK_THROWS(parallel_for(10, [](std::size_t i) {
        if (i == 7) throw std::runtime_error("boom");
    }));
    set_worker_threads(1);
    CHECK(one == four);
}
