#include <catch2/catch_amalgamated.hpp>

#include "ldplab/control.hpp"
#include "ldplab/grid.hpp"

using namespace ldplab;

TEST_CASE("uniform grid nodes and steps", "[grid]") {
    const TimeGrid g = TimeGrid::uniform(2.0, 4);
    REQUIRE(g.size() == 5);
    CHECK(g[0] == 0.0);
    CHECK(g[4] == 2.0);
    CHECK(g.step(2) == Catch::Approx(0.5));
    CHECK_THROWS(TimeGrid({0.0, 0.5, 0.5}));
    CHECK_THROWS(TimeGrid({0.1, 0.5}));
}

TEST_CASE("piecewise constant is right-continuous", "[grid]") {
    const PiecewiseConstant p({0.0, 0.5, 1.0}, {1.0, 0.8});
    CHECK(p(0.0) == 1.0);
    CHECK(p(0.4999) == 1.0);
    CHECK(p(0.5) == 0.8);
    CHECK(p(1.0) == 0.8);
    CHECK(p(7.0) == 0.8);
    CHECK(p.max_abs() == 1.0);
    CHECK(p.integrate([](double v) { return v * v; }, 1.0) == Catch::Approx(0.5 * 1.0 + 0.5 * 0.64));
    CHECK_THROWS(PiecewiseConstant({0.0, 0.5}, {1.0, 0.8}));
}

TEST_CASE("control lookup and shrinking", "[control]") {
    std::vector<SpectralField> f{SpectralField(std::vector<double>{1.0}), SpectralField(std::vector<double>{-2.0})};
    ControlPair q(TimeGrid::uniform(1.0, 2), f, {{2.0}, {0.5}});
    CHECK(q.interval_of(0.0) == 0);
    CHECK(q.interval_of(0.5) == 1);
    CHECK(q.interval_of(1.0) == 1);
    CHECK(q.f_at(0.7)[0] == -2.0);
    CHECK(q.g_at(0.2, 0) == 2.0);

    const ControlPair half = q.shrunk(0.5);
    CHECK(half.f(1)[0] == -1.0);
    CHECK(half.g(0, 0) == 1.5);
    CHECK(half.g(1, 0) == 0.75);
    CHECK(q.shrunk(0.0).is_zero_control());
    CHECK(ControlPair::zero(1.0, 3, 2).is_zero_control());
}

TEST_CASE("control rejects g outside its bounds", "[control]") {
    ControlPair q = ControlPair::zero(1.0, 1, 1);
    CHECK_THROWS(q.set_g(0, 0, 0.0));
    CHECK_THROWS(q.set_g(0, 0, 1e7));
    CHECK_NOTHROW(q.set_g(0, 0, 3.0));
}
