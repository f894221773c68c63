#include "ldplab/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ldplab {

ControlPair::ControlPair(TimeGrid partition, std::vector<SpectralField> f,
                         std::vector<std::vector<double>> g, double g_min, double g_max)
    : partition_(std::move(partition)), f_(std::move(f)), g_(std::move(g)), g_min_(g_min), g_max_(g_max) {
    const std::size_t n = partition_.steps();
    if (f_.size() != n || g_.size() != n)
        throw std::invalid_argument("ControlPair: f and g need one entry per interval");
    if (!(g_min_ > 0.0) || !(g_max_ >= g_min_) || !std::isfinite(g_max_))
        throw std::invalid_argument("ControlPair: need 0 < g_min <= g_max < inf");
    for (std::size_t i = 0; i < n; ++i) {
        if (f_[i].size() != f_.front().size())
            throw std::invalid_argument("ControlPair: f mode count differs between intervals");
        for (double c : f_[i].coeffs())
            if (!std::isfinite(c)) throw std::invalid_argument("ControlPair: non-finite f");
        if (g_[i].size() != g_.front().size())
            throw std::invalid_argument("ControlPair: g mark count differs between intervals");
        for (double v : g_[i])
            if (!(v >= g_min_ && v <= g_max_))
                throw std::invalid_argument("ControlPair: g value " + std::to_string(v) +
                                            " outside [g_min, g_max]");
    }
    if (f_.front().size() == 0) throw std::invalid_argument("ControlPair: f needs at least one mode");
    if (g_.front().empty()) throw std::invalid_argument("ControlPair: g needs at least one mark");
}

ControlPair ControlPair::zero(double horizon, std::size_t modes, std::size_t marks) {
    return constant(horizon, 1, SpectralField(modes), std::vector<double>(marks, 1.0));
}

ControlPair ControlPair::constant(double horizon, std::size_t intervals, const SpectralField& f,
                                  const std::vector<double>& g) {
    return ControlPair(TimeGrid::uniform(horizon, intervals), std::vector<SpectralField>(intervals, f),
                       std::vector<std::vector<double>>(intervals, g));
}

std::size_t ControlPair::interval_of(double t) const {
    const auto& nodes = partition_.nodes();
    const auto it = std::upper_bound(nodes.begin() + 1, nodes.end() - 1, t);
    return static_cast<std::size_t>(it - (nodes.begin() + 1));
}

void ControlPair::set_f(std::size_t interval, SpectralField value) {
    if (value.size() != modes()) throw std::invalid_argument("ControlPair::set_f: mode count mismatch");
    f_.at(interval) = std::move(value);
}

void ControlPair::set_g(std::size_t interval, std::size_t mark, double value) {
    if (!(value >= g_min_ && value <= g_max_))
        throw std::invalid_argument("ControlPair::set_g: value outside [g_min, g_max]");
    g_.at(interval).at(mark) = value;
}

double ControlPair::max_g(std::size_t mark) const {
    double m = 0.0;
    for (const auto& row : g_) m = std::max(m, row.at(mark));
    return m;
}

bool ControlPair::is_zero_control() const {
    for (std::size_t i = 0; i < intervals(); ++i) {
        for (double c : f_[i].coeffs())
            if (c != 0.0) return false;
        for (double v : g_[i])
            if (v != 1.0) return false;
    }
    return true;
}

ControlPair ControlPair::shrunk(double s) const {
    ControlPair out = *this;
    for (std::size_t i = 0; i < intervals(); ++i) {
        out.f_[i] *= s;
        for (double& v : out.g_[i]) v = std::clamp(1.0 + s * (v - 1.0), g_min_, g_max_);
    }
    return out;
}

}  // namespace ldplab
