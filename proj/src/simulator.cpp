#include "ldplab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ldplab/error.hpp"

namespace ldplab {

namespace {

/// Advances x over dt under x' = -zeta x + force (exact in the linear part).
void flow(const EigenSystem& eig, double dt, const SpectralField& force, SpectralField& x) {
    if (dt <= 0.0) return;
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::exp(-eig.zeta(k) * dt) * x[k] + phi1(eig.zeta(k), dt) * force[k];
}

SdePath simulate(const Model& model, double epsilon, const ControlPair* control, const SpectralField& x0,
                 const TimeGrid& grid, std::uint64_t seed, std::uint64_t replica, const SimOptions& opts) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("simulate: epsilon must be > 0");
    if (x0.size() != model.modes()) throw std::invalid_argument("simulate: x0 has wrong mode count");
    if (std::abs(grid.horizon() - model.horizon) > 1e-12 * model.horizon)
        throw std::invalid_argument("simulate: grid horizon differs from model horizon");
    if (control) {
        if (control->modes() != model.modes() || control->marks() != model.marks.size())
            throw std::invalid_argument("simulate: control dimensions do not match the model");
    }

    const std::size_t modes = model.modes();
    const double sqrt_eps = std::sqrt(epsilon);
    const double horizon = grid.horizon();

    SdePath path;
    path.seed = seed;
    path.replica = replica;

    BrownianTable dB = sample_brownian(modes, grid.nodes(), StreamKey{seed, replica, Purpose::brownian});
    const StreamKey jump_key{seed, replica, Purpose::jumps};
    bool tilted = false;
    if (control)
        for (std::size_t i = 0; i < control->intervals(); ++i)
            for (std::size_t j = 0; j < control->marks(); ++j) tilted = tilted || control->g(i, j) != 1.0;
    const bool skip_jumps = !opts.sample_silent_jumps && !tilted && model.jumps.is_zero();
    std::vector<JumpEvent> events;
    if (!skip_jumps)
        events = control ? sample_controlled_prm(IntensityGrid::from_control(*control), epsilon, model.marks, horizon,
                                                 jump_key)
                         : sample_prm(1.0 / epsilon, model.marks, horizon, jump_key);
    path.jump_count = events.size();

    // Girsanov pieces accumulate alongside the dynamics
    double log_w = 0.0;
    if (control) {
        for (std::size_t j = 0; j < model.marks.size(); ++j) {
            double integral = 0.0;
            for (std::size_t i = 0; i < control->intervals(); ++i)
                integral += (1.0 - control->g(i, j)) * control->partition().step(i);
            log_w += integral * model.marks.weight(j) / epsilon;
        }
        for (const auto& e : events) log_w += std::log(control->g_at(e.time, e.mark));
    }

    SpectralField x = x0;
    SpectralField force(modes);
    std::vector<double> decay(modes);
    std::vector<double> gain(modes);
    double cached_dt = -1.0;
    SpectralField kick(modes);
    if (opts.keep_states) {
        path.times = grid.nodes();
        path.states.reserve(grid.size());
        path.states.push_back(x);
    }
    path.sup_h2 = x.h_norm_squared();

    auto guard = [&](double t) {
        const double n2 = x.h_norm_squared();
        if (!(n2 <= opts.blowup * opts.blowup))
            throw BlowUp("simulate: |X|_H exceeded the blow-up guard at t = " + std::to_string(t), t, std::sqrt(n2));
        path.sup_h2 = std::max(path.sup_h2, n2);
    };

    std::size_t next_event = 0;
    for (std::size_t m = 0; m < grid.steps(); ++m) {
        const double t0 = grid[m];
        const double t1 = grid[m + 1];
        const double dt = t1 - t0;
        const double mid = 0.5 * (t0 + t1);

        // frozen drift: compensator of the jump part plus the control drift
        std::fill(force.coeffs().begin(), force.coeffs().end(), 0.0);
        for (std::size_t j = 0; j < model.marks.size(); ++j)
            model.jumps.accumulate(mid, x, j, -model.marks.weight(j), force);
        for (std::size_t k = 0; k < modes; ++k) {
            const double s = model.diffusion.singular_value(mid, x, k);
            double db = dB(m, k);
            if (control) {
                const double psi = control->f_at(mid)[k];
                force[k] += s * psi;
                // beta increment seen by the uncontrolled law
                const double shift = psi * dt / sqrt_eps;
                log_w += psi * (db + shift) / sqrt_eps - 0.5 * psi * psi * dt / epsilon;
                db += shift;
                dB(m, k) = db;
                kick[k] = sqrt_eps * s * (db - shift);
            } else {
                kick[k] = sqrt_eps * s * db;
            }
        }

        double tau = t0;
        while (next_event < events.size() && events[next_event].time <= t1) {
            const JumpEvent& e = events[next_event++];
            flow(model.eigen, e.time - tau, force, x);
            tau = e.time;
            SpectralField disp(modes);
            model.jumps.accumulate(e.time, x, e.mark, epsilon, disp);
            if (opts.keep_states) path.jumps.push_back({e.time, e.mark, x, disp});
            x += disp;
            guard(e.time);
        }
        if (tau == t0) {
            if (dt != cached_dt) {
                for (std::size_t k = 0; k < modes; ++k) {
                    decay[k] = std::exp(-model.eigen.zeta(k) * dt);
                    gain[k] = phi1(model.eigen.zeta(k), dt);
                }
                cached_dt = dt;
            }
            for (std::size_t k = 0; k < modes; ++k) x[k] = decay[k] * x[k] + gain[k] * force[k];
        } else {
            flow(model.eigen, t1 - tau, force, x);
        }
        x += kick;
        guard(t1);
        if (opts.keep_states) path.states.push_back(x);
    }

    path.terminal = x;
    path.log_weight = log_w;
    path.flagged = !std::isfinite(log_w);
    if (opts.keep_noise) path.increments = std::move(dB);
    return path;
}

}  // namespace

SdePath simulate_uncontrolled(const Model& model, double epsilon, const SpectralField& x0, const TimeGrid& grid,
                              std::uint64_t seed, std::uint64_t replica, const SimOptions& opts) {
    return simulate(model, epsilon, nullptr, x0, grid, seed, replica, opts);
}

SdePath simulate_controlled(const Model& model, double epsilon, const ControlPair& u, const SpectralField& x0,
                            const TimeGrid& grid, std::uint64_t seed, std::uint64_t replica, const SimOptions& opts) {
    return simulate(model, epsilon, &u, x0, grid, seed, replica, opts);
}

double girsanov_log_weight(const SdePath& path, const ControlPair& u, const MarkMeasure& mm, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("girsanov_log_weight: epsilon must be > 0");
    if (path.times.size() != path.increments.steps() + 1)
        throw std::invalid_argument("girsanov_log_weight: path did not keep its grid and noise");
    if (u.marks() != mm.size()) throw std::invalid_argument("girsanov_log_weight: mark count mismatch");
    double log_w = 0.0;
    for (std::size_t j = 0; j < mm.size(); ++j) {
        double integral = 0.0;
        for (std::size_t i = 0; i < u.intervals(); ++i) integral += (1.0 - u.g(i, j)) * u.partition().step(i);
        log_w += integral * mm.weight(j) / epsilon;
    }
    for (const auto& jump : path.jumps) log_w += std::log(u.g_at(jump.time, jump.mark));
    const double sqrt_eps = std::sqrt(epsilon);
    for (std::size_t m = 0; m + 1 < path.times.size(); ++m) {
        const double dt = path.times[m + 1] - path.times[m];
        const SpectralField& psi = u.f_at(0.5 * (path.times[m] + path.times[m + 1]));
        for (std::size_t k = 0; k < psi.size(); ++k)
            log_w += psi[k] * path.increments(m, k) / sqrt_eps - 0.5 * psi[k] * psi[k] * dt / epsilon;
    }
    return log_w;
}

std::pair<double, double> tail_energy(const SdePath& path, std::size_t k, double t0) {
    if (path.states.empty()) throw std::invalid_argument("tail_energy: path did not keep its states");
    const std::size_t modes = path.states.front().size();
    if (k < 1 || k > modes + 1) throw std::invalid_argument("tail_energy: cutoff must lie in [1, K+1]");
    auto energy = [&](const SpectralField& x) {
        double s = 0.0;
        for (std::size_t i = k - 1; i < modes; ++i) s += x[i] * x[i];
        return s;
    };
    double head = 0.0;
    double tail = 0.0;
    auto visit = [&](double t, double e) {
        if (t <= t0) head = std::max(head, e);
        if (t >= t0) tail = std::max(tail, e);
    };
    for (std::size_t m = 0; m < path.states.size(); ++m) visit(path.times[m], energy(path.states[m]));
    for (const auto& j : path.jumps) {
        visit(j.time, energy(j.pre));
        visit(j.time, energy(j.pre + j.displacement));
    }
    return {head, tail};
}

double sup_distance(const std::vector<SpectralField>& a, const std::vector<SpectralField>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sup_distance: trajectories differ in length");
    double d = 0.0;
    for (std::size_t m = 0; m < a.size(); ++m) d = std::max(d, (a[m] - b[m]).h_norm_squared());
    return std::sqrt(d);
}

}  // namespace ldplab
