#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ldplab/coefficients.hpp"
#include "ldplab/control.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/random.hpp"

namespace ldplab {

struct JumpEvent {
    double time = 0.0;
    std::size_t mark = 0;

    bool operator==(const JumpEvent&) const = default;
};

/// Brownian increments, one row of K entries per grid step.
class BrownianTable {
public:
    BrownianTable() = default;
    BrownianTable(std::size_t modes, std::size_t steps) : modes_(modes), steps_(steps), data_(modes * steps, 0.0) {}

    std::size_t modes() const noexcept { return modes_; }
    std::size_t steps() const noexcept { return steps_; }
    double& operator()(std::size_t step, std::size_t k) { return data_[step * modes_ + k]; }
    double operator()(std::size_t step, std::size_t k) const { return data_[step * modes_ + k]; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const BrownianTable&) const = default;

private:
    std::size_t modes_ = 0;
    std::size_t steps_ = 0;
    std::vector<double> data_;
};

struct NoiseBundle {
    std::uint64_t seed = 0;
    std::vector<double> grid;
    BrownianTable brownian;
    std::vector<JumpEvent> jumps;

    bool operator==(const NoiseBundle&) const = default;
};

/// Nonnegative jump intensity factors, piecewise constant on a partition, one column per mark.
struct IntensityGrid {
    TimeGrid partition;
    std::vector<std::vector<double>> values;  // [interval][mark]

    static IntensityGrid constant(double horizon, std::size_t marks, double value);
    static IntensityGrid from_control(const ControlPair& q);
    double at(double t, std::size_t mark) const;
    double max(std::size_t mark) const;
    std::size_t marks() const { return values.front().size(); }
};

/// Independent N(0, dt_m) increments for K modes over every grid step.
BrownianTable sample_brownian(std::size_t modes, std::span<const double> grid, StreamKey key);
BrownianTable sample_brownian(std::size_t modes, std::span<const double> grid, std::uint64_t seed);

/// PRM on (0, T] x marks with intensity theta * nu: Poisson counts per mark, uniform times, merged by time.
std::vector<JumpEvent> sample_prm(double theta, const MarkMeasure& mm, double horizon, StreamKey key);
std::vector<JumpEvent> sample_prm(double theta, const MarkMeasure& mm, double horizon, std::uint64_t seed);

/// N^{phi / epsilon} by thinning a dominating PRM of intensity phi_max / epsilon per mark.
/// With phi == const == phi_max the event list coincides with sample_prm(phi_max / epsilon) for the same key.
std::vector<JumpEvent> sample_controlled_prm(const IntensityGrid& phi, double epsilon, const MarkMeasure& mm,
                                             double horizon, StreamKey key);
std::vector<JumpEvent> sample_controlled_prm(const IntensityGrid& phi, double epsilon, const MarkMeasure& mm,
                                             double horizon, std::uint64_t seed);

/// Little-endian dump: magic "LDPNOISE", u64 seed, u64 K, u64 node count, f64 nodes,
/// f64 increments (step-major), u64 event count, then (f64 time, u64 mark) per event.
void write_noise_bundle(std::ostream& out, const NoiseBundle& bundle);
NoiseBundle read_noise_bundle(std::istream& in);

}  // namespace ldplab
