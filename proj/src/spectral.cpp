#include "ldplab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ldplab {

SpectralField SpectralField::unit(std::size_t modes, std::size_t k) {
    if (k >= modes) throw std::out_of_range("SpectralField::unit: mode index out of range");
    SpectralField u(modes);
    u[k] = 1.0;
    return u;
}

double SpectralField::h_norm_squared() const noexcept {
    double s = 0.0;
    for (double c : coeffs_) s += c * c;
    return s;
}

double SpectralField::h_norm() const noexcept { return std::sqrt(h_norm_squared()); }

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    if (other.size() != size()) throw std::invalid_argument("SpectralField: mode count mismatch");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
    if (other.size() != size()) throw std::invalid_argument("SpectralField: mode count mismatch");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
}

double dot(const SpectralField& a, const SpectralField& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: mode count mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

namespace {

void validate_zetas(const std::vector<double>& zetas) {
    if (zetas.empty()) throw std::invalid_argument("EigenSystem: at least one mode required");
    for (std::size_t k = 0; k < zetas.size(); ++k) {
        if (!std::isfinite(zetas[k]) || zetas[k] < 0.0)
            throw std::invalid_argument("EigenSystem: eigenvalue " + std::to_string(k + 1) +
                                        " must be finite and >= 0");
        if (k > 0 && zetas[k] < zetas[k - 1])
            throw std::invalid_argument("EigenSystem: eigenvalues must be nondecreasing");
    }
}

}  // namespace

EigenSystem::EigenSystem(std::vector<double> zetas, double lambda0)
    : EigenSystem(std::move(zetas), lambda0, std::min(2.0, lambda0)) {}

EigenSystem::EigenSystem(std::vector<double> zetas, double lambda0, double alpha)
    : zetas_(std::move(zetas)), lambda0_(lambda0), alpha_(alpha) {
    validate_zetas(zetas_);
    if (!(lambda0_ > 0.0) || !std::isfinite(lambda0_))
        throw std::invalid_argument("EigenSystem: lambda0 must be > 0");
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_))
        throw std::invalid_argument("EigenSystem: alpha must be > 0");
}

double EigenSystem::v_norm_squared(const SpectralField& u) const {
    if (u.size() != modes()) throw std::invalid_argument("v_norm_squared: mode count mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < modes(); ++k) s += (1.0 + zetas_[k]) * u[k] * u[k];
    return s;
}

double EigenSystem::energy(const SpectralField& u) const {
    if (u.size() != modes()) throw std::invalid_argument("energy: mode count mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < modes(); ++k) s += zetas_[k] * u[k] * u[k];
    return s;
}

SpectralField semigroup_apply(const EigenSystem& sys, double t, const SpectralField& u) {
    if (!(t >= 0.0)) throw std::invalid_argument("semigroup_apply: t must be >= 0");
    if (u.size() != sys.modes()) throw std::invalid_argument("semigroup_apply: mode count mismatch");
    SpectralField out(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = std::exp(-sys.zeta(k) * t) * u[k];
    return out;
}

EigenSystem fractional_laplacian_system(double order, std::size_t modes, double domain_length,
                                        double lambda0) {
    if (!(order > 0.0 && order <= 2.0))
        throw std::invalid_argument("fractional_laplacian_system: order must lie in (0, 2]");
    if (!(domain_length > 0.0))
        throw std::invalid_argument("fractional_laplacian_system: domain_length must be > 0");
    if (modes == 0) throw std::invalid_argument("fractional_laplacian_system: modes must be >= 1");
    std::vector<double> zetas(modes);
    for (std::size_t k = 0; k < modes; ++k) {
        const double base = static_cast<double>(k + 1) * std::numbers::pi / domain_length;
        zetas[k] = std::pow(base * base, order / 2.0);
    }
    return EigenSystem(std::move(zetas), lambda0);
}

double coercivity_margin(const EigenSystem& sys, const SpectralField& u) {
    return 2.0 * sys.energy(u) + sys.lambda0() * u.h_norm_squared() - sys.alpha() * sys.v_norm_squared(u);
}

double phi1(double zeta, double dt) noexcept {
    const double x = zeta * dt;
    if (std::abs(x) < 1e-8) return dt * (1.0 - 0.5 * x);
    return -std::expm1(-x) / zeta;
}

}  // namespace ldplab
