#include "ldplab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldplab {

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw std::invalid_argument("TimeGrid: need at least one step");
    if (nodes_.front() != 0.0) throw std::invalid_argument("TimeGrid: grid must start at 0");
    for (std::size_t m = 1; m < nodes_.size(); ++m)
        if (!(nodes_[m] > nodes_[m - 1]))
            throw std::invalid_argument("TimeGrid: nodes must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid::uniform: horizon must be > 0");
    if (steps == 0) throw std::invalid_argument("TimeGrid::uniform: steps must be >= 1");
    std::vector<double> nodes(steps + 1);
    for (std::size_t m = 0; m <= steps; ++m)
        nodes[m] = horizon * static_cast<double>(m) / static_cast<double>(steps);
    nodes.back() = horizon;
    return TimeGrid(std::move(nodes));
}

PiecewiseConstant::PiecewiseConstant(double constant) : values_{constant} {
    if (!std::isfinite(constant)) throw std::invalid_argument("PiecewiseConstant: non-finite value");
}

PiecewiseConstant::PiecewiseConstant(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("PiecewiseConstant: no values");
    if (knots_.size() != values_.size() + 1)
        throw std::invalid_argument("PiecewiseConstant: need exactly one more knot than values");
    if (knots_.front() != 0.0) throw std::invalid_argument("PiecewiseConstant: first knot must be 0");
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (!(knots_[i] > knots_[i - 1]))
            throw std::invalid_argument("PiecewiseConstant: knots must be strictly increasing");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("PiecewiseConstant: non-finite value");
    if (values_.size() == 1) knots_.clear();
}

double PiecewiseConstant::operator()(double t) const {
    if (knots_.empty()) return values_.front();
    // index of the last knot <= t among the interior ones
    const auto it = std::upper_bound(knots_.begin() + 1, knots_.end() - 1, t);
    return values_[static_cast<std::size_t>(it - (knots_.begin() + 1))];
}

double PiecewiseConstant::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

PiecewiseConstant PiecewiseConstant::scaled(double s) const {
    PiecewiseConstant out = *this;
    for (double& v : out.values_) v *= s;
    return out;
}

}  // namespace ldplab
