#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ldplab {

/// Time nodes 0 = t_0 < t_1 < ... < t_M = T.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> nodes);
    static TimeGrid uniform(double horizon, std::size_t steps);

    std::size_t steps() const noexcept { return nodes_.size() - 1; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double horizon() const noexcept { return nodes_.back(); }
    double operator[](std::size_t m) const { return nodes_[m]; }
    double step(std::size_t m) const { return nodes_[m + 1] - nodes_[m]; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }

    bool operator==(const TimeGrid&) const = default;

private:
    std::vector<double> nodes_;
};

/// Right-continuous step function with knots.size() == values.size() + 1 and knots.front() == 0:
/// value i holds on [knots[i], knots[i+1]); the last value extends to the right of knots.back().
class PiecewiseConstant {
public:
    PiecewiseConstant() : PiecewiseConstant(0.0) {}
    explicit PiecewiseConstant(double constant);
    PiecewiseConstant(std::vector<double> knots, std::vector<double> values);

    double operator()(double t) const;
    std::size_t pieces() const noexcept { return values_.size(); }
    bool is_constant() const noexcept { return knots_.empty(); }
    const std::vector<double>& knots() const noexcept { return knots_; }
    const std::vector<double>& values() const noexcept { return values_; }

    double max_abs() const;
    /// Integral of F(value) over [0, horizon]; a constant function covers the whole horizon.
    template <class F>
    double integrate(F&& fn, double horizon) const {
        if (knots_.empty()) return fn(values_.front()) * horizon;
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double lo = knots_[i];
            double hi = i + 1 < values_.size() ? knots_[i + 1] : horizon;
            if (hi > horizon) hi = horizon;
            if (hi > lo) s += fn(values_[i]) * (hi - lo);
        }
        return s;
    }

    PiecewiseConstant scaled(double s) const;

    bool operator==(const PiecewiseConstant&) const = default;

private:
    std::vector<double> knots_;  // empty for a constant
    std::vector<double> values_;
};

}  // namespace ldplab
