#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ldplab {

/// Element of H written in the eigenbasis {e_k}: coeffs[k] = <u, e_k>.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(std::size_t modes) : coeffs_(modes, 0.0) {}
    explicit SpectralField(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

    static SpectralField unit(std::size_t modes, std::size_t k);

    std::size_t size() const noexcept { return coeffs_.size(); }
    double& operator[](std::size_t k) { return coeffs_[k]; }
    double operator[](std::size_t k) const { return coeffs_[k]; }

    std::span<double> coeffs() noexcept { return coeffs_; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    const std::vector<double>& vector() const noexcept { return coeffs_; }

    double h_norm_squared() const noexcept;
    double h_norm() const noexcept;

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double s);

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    bool operator==(const SpectralField&) const = default;

private:
    std::vector<double> coeffs_;
};

double dot(const SpectralField& a, const SpectralField& b);

/// Eigenvalues of A* for a diagonal coercive operator, plus the coercivity pair (lambda0, alpha).
///
/// The V-norm is fixed as sum (1 + zeta_k) u_k^2, so 2<Au,u> + lambda0 |u|_H^2 >= alpha |u|_V^2
/// holds with alpha = min(2, lambda0).
class EigenSystem {
public:
    EigenSystem(std::vector<double> zetas, double lambda0 = 1.0);
    EigenSystem(std::vector<double> zetas, double lambda0, double alpha);

    std::size_t modes() const noexcept { return zetas_.size(); }
    double zeta(std::size_t k) const { return zetas_[k]; }
    const std::vector<double>& zetas() const noexcept { return zetas_; }
    double lambda0() const noexcept { return lambda0_; }
    double alpha() const noexcept { return alpha_; }

    double v_norm_squared(const SpectralField& u) const;
    /// <Au, u> = sum zeta_k u_k^2
    double energy(const SpectralField& u) const;

    bool operator==(const EigenSystem&) const = default;

private:
    std::vector<double> zetas_;
    double lambda0_;
    double alpha_;
};

/// e^{-At} u, coefficientwise e^{-zeta_k t} u_k. Rejects t < 0.
SpectralField semigroup_apply(const EigenSystem& sys, double t, const SpectralField& u);

/// Dirichlet spectrum of (0, L) raised to order/2: zeta_k = ((k pi / L)^2)^{order/2}, k = 1..modes.
EigenSystem fractional_laplacian_system(double order, std::size_t modes, double domain_length,
                                        double lambda0 = 1.0);

/// 2<Au,u> + lambda0 |u|_H^2 - alpha |u|_V^2
double coercivity_margin(const EigenSystem& sys, const SpectralField& u);

/// (1 - e^{-zeta dt}) / zeta, with the limit dt at zeta = 0.
double phi1(double zeta, double dt) noexcept;

}  // namespace ldplab
