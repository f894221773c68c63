#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "ldplab/spectral.hpp"

using namespace ldplab;
using Catch::Approx;

TEST_CASE("semigroup at t = 0 is the identity", "[spectral]") {
    const EigenSystem sys({1.0, 4.0, 9.0});
    const SpectralField u(std::vector<double>{0.3, -1.2, 5.0});
    CHECK(semigroup_apply(sys, 0.0, u) == u);
}

TEST_CASE("semigroup halves and quarters at t = ln 2", "[spectral]") {
    const EigenSystem sys({1.0, 2.0});
    const SpectralField v = semigroup_apply(sys, std::log(2.0), SpectralField(std::vector<double>{1.0, 1.0}));
    CHECK(v[0] == Approx(0.5).epsilon(1e-15));
    CHECK(v[1] == Approx(0.25).epsilon(1e-15));
}

TEST_CASE("semigroup scalar value against long double exp", "[spectral]") {
    const EigenSystem sys({0.7});
    const SpectralField v = semigroup_apply(sys, 1.3, SpectralField(std::vector<double>{3.0}));
    const long double ref = 3.0L * std::exp(-0.91L);
    CHECK(std::abs(v[0] - static_cast<double>(ref)) < 1e-15);
}

TEST_CASE("semigroup rejects negative time", "[spectral]") {
    const EigenSystem sys({1.0});
    CHECK_THROWS_AS(semigroup_apply(sys, -0.1, SpectralField(1)), std::invalid_argument);
}

TEST_CASE("semigroup property S(t)S(s) = S(t+s)", "[spectral][property]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    const EigenSystem sys = fractional_laplacian_system(1.5, 6, std::numbers::pi);
    for (int i = 0; i < 200; ++i) {
        SpectralField u(6);
        for (std::size_t k = 0; k < 6; ++k) u[k] = unif(rng) - 1.0;
        const double t = unif(rng);
        const double s = unif(rng);
        const SpectralField a = semigroup_apply(sys, t, semigroup_apply(sys, s, u));
        const SpectralField b = semigroup_apply(sys, t + s, u);
        CHECK((a - b).h_norm() < 1e-14);
        // contraction
        CHECK(b.h_norm() <= u.h_norm() + 1e-15);
    }
}

TEST_CASE("fractional Laplacian spectra", "[spectral]") {
    const EigenSystem lap = fractional_laplacian_system(2.0, 3, std::numbers::pi);
    CHECK(lap.zeta(0) == Approx(1.0));
    CHECK(lap.zeta(1) == Approx(4.0));
    CHECK(lap.zeta(2) == Approx(9.0));

    const EigenSystem half = fractional_laplacian_system(1.0, 3, std::numbers::pi);
    CHECK(half.zeta(0) == Approx(1.0));
    CHECK(half.zeta(1) == Approx(2.0));
    CHECK(half.zeta(2) == Approx(3.0));

    const EigenSystem quarter = fractional_laplacian_system(0.5, 2, 2.0);
    for (std::size_t k = 1; k <= 2; ++k)
        CHECK(quarter.zeta(k - 1) == Approx(std::pow(k * std::numbers::pi / 2.0, 0.5)).epsilon(1e-14));

    CHECK_THROWS(fractional_laplacian_system(2.5, 3, 1.0));
    CHECK_THROWS(fractional_laplacian_system(1.0, 3, -1.0));
}

TEST_CASE("coercivity margin examples", "[spectral]") {
    const EigenSystem sys({1.0}, 1.0, 1.0);
    CHECK(coercivity_margin(sys, SpectralField(1)) == 0.0);
    CHECK(coercivity_margin(sys, SpectralField(std::vector<double>{1.0})) == Approx(1.0));
}

TEST_CASE("coercivity margin is nonnegative with alpha = min(2, lambda0)", "[spectral][property]") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    for (double lambda0 : {0.1, 1.0, 2.0, 5.0}) {
        const EigenSystem sys = fractional_laplacian_system(1.2, 8, 3.0, lambda0);
        CHECK(sys.alpha() == Approx(std::min(2.0, lambda0)));
        for (int i = 0; i < 1000; ++i) {
            SpectralField u(8);
            for (std::size_t k = 0; k < 8; ++k) u[k] = 3.0 * normal(rng);
            CHECK(coercivity_margin(sys, u) >= -1e-12);
        }
    }
}

TEST_CASE("V norm and energy", "[spectral]") {
    const EigenSystem sys({1.0, 3.0});
    const SpectralField u(std::vector<double>{2.0, -1.0});
    CHECK(sys.v_norm_squared(u) == Approx(2.0 * 4.0 + 4.0 * 1.0));
    CHECK(sys.energy(u) == Approx(4.0 + 3.0));
    CHECK(u.h_norm_squared() == Approx(5.0));
}

TEST_CASE("phi1 matches its series and the zero limit", "[spectral]") {
    CHECK(phi1(0.0, 0.3) == 0.3);
    for (double z : {1e-12, 1e-6, 0.5, 40.0}) {
        const double dt = 0.01;
        const double ref = -std::expm1(-z * dt) / z;
        CHECK(phi1(z, dt) == Approx(ref).epsilon(1e-13));
    }
}
