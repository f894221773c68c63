#pragma once

#include <cstddef>
#include <vector>

#include "ldplab/grid.hpp"
#include "ldplab/spectral.hpp"

namespace ldplab {

/// Deterministic control q = (f, g), piecewise constant on its own partition of [0, T].
///
/// f is H-valued (one SpectralField per interval); g holds one positive intensity factor
/// per interval and mark, kept inside [g_min, g_max].
class ControlPair {
public:
    static constexpr double kDefaultGMin = 1e-6;
    static constexpr double kDefaultGMax = 1e6;

    ControlPair(TimeGrid partition, std::vector<SpectralField> f, std::vector<std::vector<double>> g,
                double g_min = kDefaultGMin, double g_max = kDefaultGMax);

    /// q = (0, 1) on a single interval.
    static ControlPair zero(double horizon, std::size_t modes, std::size_t marks);
    /// Constant f and g on `intervals` equal pieces.
    static ControlPair constant(double horizon, std::size_t intervals, const SpectralField& f,
                                const std::vector<double>& g);

    const TimeGrid& partition() const noexcept { return partition_; }
    std::size_t intervals() const noexcept { return partition_.steps(); }
    std::size_t modes() const noexcept { return f_.front().size(); }
    std::size_t marks() const noexcept { return g_.front().size(); }
    double horizon() const noexcept { return partition_.horizon(); }
    double g_min() const noexcept { return g_min_; }
    double g_max() const noexcept { return g_max_; }

    std::size_t interval_of(double t) const;
    const SpectralField& f_at(double t) const { return f_[interval_of(t)]; }
    double g_at(double t, std::size_t mark) const { return g_[interval_of(t)][mark]; }

    const SpectralField& f(std::size_t interval) const { return f_[interval]; }
    double g(std::size_t interval, std::size_t mark) const { return g_[interval][mark]; }
    void set_f(std::size_t interval, SpectralField value);
    void set_g(std::size_t interval, std::size_t mark, double value);

    double max_g(std::size_t mark) const;
    bool is_zero_control() const;

    /// f scaled by s and g pulled towards 1: g' = 1 + s (g - 1).
    ControlPair shrunk(double s) const;

    bool operator==(const ControlPair&) const = default;

private:
    TimeGrid partition_;
    std::vector<SpectralField> f_;
    std::vector<std::vector<double>> g_;
    double g_min_;
    double g_max_;
};

}  // namespace ldplab
