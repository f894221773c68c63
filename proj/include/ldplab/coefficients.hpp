#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ldplab/control.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/spectral.hpp"

namespace ldplab {

/// Finite discrete mark space {v_1..v_m} with intensities nu_j > 0.
class MarkMeasure {
public:
    MarkMeasure(std::vector<std::string> labels, std::vector<double> weights);
    explicit MarkMeasure(std::vector<double> weights);

    std::size_t size() const noexcept { return weights_.size(); }
    double weight(std::size_t j) const { return weights_[j]; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::string& label(std::size_t j) const { return labels_[j]; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    double total_mass() const noexcept;

    bool operator==(const MarkMeasure&) const = default;

private:
    std::vector<std::string> labels_;
    std::vector<double> weights_;
};

/// Diagonal sigma(t, u): mode-k singular value s_k = clamp(a_k(t) + b_k u_k, -clip, clip).
class DiffusionCoefficient {
public:
    DiffusionCoefficient(std::vector<PiecewiseConstant> a, std::vector<double> b,
                         double clip = std::numeric_limits<double>::infinity());
    static DiffusionCoefficient zero(std::size_t modes);

    std::size_t modes() const noexcept { return a_.size(); }
    double singular_value(double t, const SpectralField& u, std::size_t k) const;
    /// Coefficientwise s_k(t, u) * w_k.
    SpectralField apply(double t, const SpectralField& u, const SpectralField& w) const;
    double hs_norm_squared(double t, const SpectralField& u) const;
    /// |sigma(t,u1) - sigma(t,u2)|^2 in L_2(H)
    double hs_distance_squared(double t, const SpectralField& u1, const SpectralField& u2) const;

    const std::vector<PiecewiseConstant>& a() const noexcept { return a_; }
    const std::vector<double>& b() const noexcept { return b_; }
    double clip() const noexcept { return clip_; }
    bool is_additive() const noexcept;
    bool is_zero() const noexcept;

    bool operator==(const DiffusionCoefficient&) const = default;

private:
    std::vector<PiecewiseConstant> a_;
    std::vector<double> b_;
    double clip_;
};

/// One mark's affine law G(t, u, v_j) = c_j(t) (alpha_j h_j + beta_j u), h_j a unit field.
struct JumpLaw {
    PiecewiseConstant scale;
    double alpha = 0.0;
    double beta = 0.0;
    SpectralField direction;

    bool operator==(const JumpLaw&) const = default;
};

class JumpCoefficient {
public:
    explicit JumpCoefficient(std::vector<JumpLaw> laws);
    static JumpCoefficient zero(std::size_t modes, std::size_t marks);

    std::size_t marks() const noexcept { return laws_.size(); }
    const JumpLaw& law(std::size_t j) const { return laws_[j]; }
    const std::vector<JumpLaw>& laws() const noexcept { return laws_; }

    SpectralField evaluate(double t, const SpectralField& u, std::size_t j) const;
    /// out += weight * G(t, u, v_j)
    void accumulate(double t, const SpectralField& u, std::size_t j, double weight, SpectralField& out) const;
    bool is_zero() const noexcept;

    bool operator==(const JumpCoefficient&) const = default;

private:
    std::vector<JumpLaw> laws_;
};

/// Full coefficient set of the evolution equation together with the initial state and horizon.
struct Model {
    EigenSystem eigen;
    DiffusionCoefficient diffusion;
    JumpCoefficient jumps;
    MarkMeasure marks;
    SpectralField x0;
    double horizon = 1.0;
    /// K(t) of the growth and Lipschitz conditions.
    PiecewiseConstant majorant;

    std::size_t modes() const noexcept { return eigen.modes(); }
    /// Throws std::invalid_argument when dimensions disagree.
    void validate() const;
    /// Same model with sigma and G removed.
    Model noiseless() const;

    bool operator==(const Model&) const = default;
};

/// Majorant K(t) = |a(t)|^2 + max_k b_k^2 + sum_j c_j(t)^2 (alpha_j^2 + beta_j^2) nu_j.
/// Equals the exact growth constant for purely additive coefficients.
PiecewiseConstant default_majorant(const DiffusionCoefficient& dc, const JumpCoefficient& jc,
                                   const MarkMeasure& mm, double horizon);

struct GNorms {
    double zero_norm = 0.0;
    double one_norm = 0.0;
    bool estimated = false;  // true when obtained by sampling rather than closed form
};

/// |G(t, v_j)|_{0,H} and |G(t, v_j)|_{1,H} for the affine family (closed form).
GNorms g_norms(const JumpCoefficient& jc, double t, std::size_t j);

using JumpFunction = std::function<SpectralField(double t, const SpectralField& u)>;
/// Sampled suprema for an arbitrary G(t, ., v); always flagged as estimates.
GNorms estimate_g_norms(const JumpFunction& g, double t, std::size_t modes, std::size_t samples,
                        std::uint64_t seed);

struct InequalityCheck {
    std::string name;
    double max_ratio = 0.0;
    double worst_time = 0.0;
    double worst_norm = 0.0;  // |u| (growth) or |u1 - u2| (Lipschitz) at the worst sample
    bool satisfied = true;
};

struct ConditionReport {
    InequalityCheck growth;
    InequalityCheck lipschitz;
    std::size_t samples = 0;
    bool satisfied = true;
    std::vector<std::string> violated;  // names of violated inequalities
};

inline constexpr double kConditionSlack = 1e-9;

/// Samples (t, u1, u2) and reports the worst growth and Lipschitz ratios against K(t).
ConditionReport check_conditions(const Model& model, std::size_t n_samples, std::uint64_t seed);

/// Exact value of int_0^T sum_j exp(delta |G(s, v_j)|_{i,H}^power) nu_j ds (power 2 by default).
double check_exp_integrability(const Model& model, double delta, int which, int power = 2);

struct Lemma34Bounds {
    double c_2[2] = {0.0, 0.0};  // bounds on sup_{g in S^N} int |G|_i^2 (g + 1) dnu_T
    double c_1[2] = {0.0, 0.0};  // bounds on sup_{g in S^N} int |G|_i |g - 1| dnu_T
};

/// Explicit bounds from the Fenchel-Young pair a b <= (e^{s a} - 1 + l(b)) / s.
Lemma34Bounds lemma34_bounds(const Model& model, double budget, double sigma);

struct Lemma34Integrals {
    double c_2[2] = {0.0, 0.0};
    double c_1[2] = {0.0, 0.0};
};

/// The two integrals for one concrete jump control g (exact on the merged knot partition).
Lemma34Integrals lemma34_integrals(const Model& model, const ControlPair& q);

/// Sorted union of knot positions of all coefficient tables inside [0, horizon], including both ends.
std::vector<double> coefficient_knots(const Model& model);

}  // namespace ldplab
