#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ldplab/coefficients.hpp"
#include "ldplab/control.hpp"
#include "ldplab/grid.hpp"
#include "ldplab/noise.hpp"

namespace ldplab {

struct AppliedJump {
    double time = 0.0;
    std::size_t mark = 0;
    SpectralField pre;           // X_{s-}
    SpectralField displacement;  // epsilon * G(s, X_{s-}, v)
};

/// One simulated cadlag trajectory with its noise and Girsanov log-density.
struct SdePath {
    std::vector<double> times;
    std::vector<SpectralField> states;  // one per grid node (empty unless states were kept)
    std::vector<AppliedJump> jumps;
    /// Increments of the driving Brownian motion beta per step (includes the psi drift under a control).
    BrownianTable increments;
    SpectralField terminal;
    double sup_h2 = 0.0;  // sup over nodes and post-jump states of |X|_H^2
    double log_weight = 0.0;
    bool flagged = false;  // infinite importance weight
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;
    std::size_t jump_count = 0;
};

struct SimOptions {
    bool keep_states = true;
    bool keep_noise = true;
    double blowup = 1e8;
    /// When false and G == 0, jumps are not sampled for runs that cannot tilt them (they move nothing).
    bool sample_silent_jumps = true;
};

/// Exponential Euler per mode for the uncontrolled equation: compensator -sum_j G nu_j and sigma
/// frozen at the left end of each step, jumps epsilon G(s, X_{s-}, v) applied at their sampled
/// times (intensity nu / epsilon), diffusion kick sqrt(epsilon) sigma dbeta added at the step end.
SdePath simulate_uncontrolled(const Model& model, double epsilon, const SpectralField& x0, const TimeGrid& grid,
                              std::uint64_t seed, std::uint64_t replica = 0, const SimOptions& opts = {});

/// Same scheme with the drift sigma(X) psi added and jumps drawn from N^{phi / epsilon}; log_weight
/// holds log of the density of the controlled law with respect to the uncontrolled one.
SdePath simulate_controlled(const Model& model, double epsilon, const ControlPair& u, const SpectralField& x0,
                            const TimeGrid& grid, std::uint64_t seed, std::uint64_t replica = 0,
                            const SimOptions& opts = {});

/// sum_jumps log phi + (1/eps) int (1 - phi) dnu_T + (1/sqrt eps) int psi dbeta - (1/(2 eps)) int |psi|^2 ds.
/// Needs a path that kept its noise. Returns -inf when phi vanishes at an observed jump.
double girsanov_log_weight(const SdePath& path, const ControlPair& u, const MarkMeasure& mm, double epsilon);

/// (sup_{t <= t0}, sup_{t >= t0}) of sum_{i >= k} <X_t, e_i>^2 over nodes and jump states; k is 1-based.
std::pair<double, double> tail_energy(const SdePath& path, std::size_t k, double t0);

/// sup over grid nodes of |a_m - b_m|_H.
double sup_distance(const std::vector<SpectralField>& a, const std::vector<SpectralField>& b);

}  // namespace ldplab
