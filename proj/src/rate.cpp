#include "ldplab/rate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "ldplab/error.hpp"
#include "ldplab/parallel.hpp"

namespace ldplab {

double ell(double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("ell: argument must be >= 0");
    if (r == 0.0) return 1.0;
    return r * std::log(r) - r + 1.0;
}

CostReport cost_of_control(const ControlPair& q, const MarkMeasure& mm) {
    if (q.marks() != mm.size()) throw std::invalid_argument("cost_of_control: control and mark measure disagree");
    CostReport c;
    for (std::size_t i = 0; i < q.intervals(); ++i) {
        const double dt = q.partition().step(i);
        c.tilde_cost += 0.5 * q.f(i).h_norm_squared() * dt;
        for (std::size_t j = 0; j < mm.size(); ++j) c.jump_cost += ell(q.g(i, j)) * mm.weight(j) * dt;
    }
    c.total = c.tilde_cost + c.jump_cost;
    return c;
}

CostReport cost_of_control(const ControlPair& q, const MarkMeasure& mm, const TimeGrid& grid) {
    if (std::abs(q.horizon() - grid.horizon()) > 1e-12 * grid.horizon())
        throw std::invalid_argument("cost_of_control: control horizon differs from grid horizon");
    return cost_of_control(q, mm);
}

bool in_cost_ball(const ControlPair& q, const MarkMeasure& mm, double budget) {
    const CostReport c = cost_of_control(q, mm);
    return c.tilde_cost <= budget && c.jump_cost <= budget;
}

TerminalTarget TerminalTarget::point(SpectralField z) {
    TerminalTarget t;
    t.kind = Kind::point;
    t.centre = std::move(z);
    return t;
}

TerminalTarget TerminalTarget::ball(SpectralField z, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("TerminalTarget::ball: radius must be >= 0");
    TerminalTarget t;
    t.kind = Kind::ball;
    t.centre = std::move(z);
    t.radius = r;
    return t;
}

TerminalTarget TerminalTarget::half_space(double level, std::size_t mode) {
    TerminalTarget t;
    t.kind = Kind::half_space;
    t.level = level;
    t.mode = mode;
    return t;
}

TerminalTarget TerminalTarget::ball_complement(SpectralField z, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("TerminalTarget::ball_complement: radius must be >= 0");
    TerminalTarget t;
    t.kind = Kind::ball_complement;
    t.centre = std::move(z);
    t.radius = r;
    return t;
}

double TerminalTarget::distance(const SpectralField& x) const {
    switch (kind) {
        case Kind::point:
            return (x - centre).h_norm();
        case Kind::ball:
            return std::max(0.0, (x - centre).h_norm() - radius);
        case Kind::half_space:
            if (mode >= x.size()) throw std::invalid_argument("TerminalTarget: half-space mode out of range");
            return std::max(0.0, level - x[mode]);
        case Kind::ball_complement:
            return std::max(0.0, radius - (x - centre).h_norm());
    }
    return 0.0;
}

SpectralField skeleton_terminal(const Model& model, const ControlPair& q, std::size_t steps,
                                const SkeletonOptions& sk) {
    return solve_skeleton(model, q, model.x0, TimeGrid::uniform(model.horizon, steps), sk).terminal();
}

namespace {

struct Param {
    std::size_t interval;
    bool is_g;
    std::size_t index;  // mode or mark
};

struct Eval {
    double objective = std::numeric_limits<double>::infinity();
    double cost = 0.0;
    double residual = 0.0;
};

class Problem {
public:
    Problem(const Model& model, const TerminalTarget& target, const ControlPair& init, const RateOptions& opts)
        : model_(model), target_(target), base_(init), grid_(TimeGrid::uniform(model.horizon, opts.steps)) {
        sk_.tol = opts.skeleton_tol;
        sk_.max_iter = opts.skeleton_max_iter;
        for (std::size_t i = 0; i < init.intervals(); ++i) {
            if (opts.optimize_f)
                for (std::size_t k = 0; k < model.modes(); ++k)
                    if (!mode_is_silent(k)) params_.push_back({i, false, k});
            if (opts.optimize_g)
                for (std::size_t j = 0; j < model.marks.size(); ++j)
                    if (!mark_is_silent(j)) params_.push_back({i, true, j});
        }
        // silent directions sit at their cost minimum
        for (std::size_t i = 0; i < init.intervals(); ++i) {
            SpectralField f = base_.f(i);
            for (std::size_t k = 0; k < model.modes(); ++k)
                if (mode_is_silent(k)) f[k] = 0.0;
            base_.set_f(i, f);
            for (std::size_t j = 0; j < model.marks.size(); ++j)
                if (mark_is_silent(j)) base_.set_g(i, j, 1.0);
        }
        theta_max_ = std::log(base_.g_max() - base_.g_min());
    }

    std::size_t size() const { return params_.size(); }

    std::vector<double> initial() const {
        std::vector<double> th(params_.size());
        for (std::size_t p = 0; p < params_.size(); ++p) {
            const Param& pr = params_[p];
            if (pr.is_g) {
                const double gap = base_.g(pr.interval, pr.index) - base_.g_min();
                th[p] = std::log(std::max(gap, 1e-300));
            } else {
                th[p] = base_.f(pr.interval)[pr.index];
            }
        }
        return th;
    }

    ControlPair build(const std::vector<double>& th) const {
        ControlPair q = base_;
        for (std::size_t p = 0; p < params_.size(); ++p) {
            const Param& pr = params_[p];
            if (pr.is_g) {
                const double g = q.g_min() + std::exp(std::min(th[p], theta_max_));
                q.set_g(pr.interval, pr.index, std::clamp(g, q.g_min(), q.g_max()));
            } else {
                SpectralField f = q.f(pr.interval);
                f[pr.index] = th[p];
                q.set_f(pr.interval, std::move(f));
            }
        }
        return q;
    }

    Eval evaluate(const std::vector<double>& th, double mu) const {
        Eval e;
        for (double v : th)
            if (!std::isfinite(v)) return e;
        const ControlPair q = build(th);
        try {
            const SpectralField xt = solve_skeleton(model_, q, model_.x0, grid_, sk_).terminal();
            e.cost = cost_of_control(q, model_.marks).total;
            e.residual = target_.distance(xt);
            e.objective = e.cost + mu * e.residual * e.residual;
        } catch (const NonConvergence&) {
            e.objective = std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(e.objective)) e.objective = std::numeric_limits<double>::infinity();
        return e;
    }

    std::vector<double> gradient(const std::vector<double>& th, double mu, double rel_step) const {
        std::vector<double> g(th.size());
        parallel_for(th.size(), [&](std::size_t p) {
            const double h = rel_step * std::max(1.0, std::abs(th[p]));
            std::vector<double> a = th;
            std::vector<double> b = th;
            a[p] += h;
            b[p] -= h;
            g[p] = (evaluate(a, mu).objective - evaluate(b, mu).objective) / (2.0 * h);
        });
        return g;
    }

    SpectralField terminal(const ControlPair& q) const {
        return solve_skeleton(model_, q, model_.x0, grid_, sk_).terminal();
    }

private:
    bool mode_is_silent(std::size_t k) const {
        const auto& a = model_.diffusion.a()[k];
        return a.max_abs() == 0.0 && model_.diffusion.b()[k] == 0.0;
    }
    bool mark_is_silent(std::size_t j) const {
        const JumpLaw& law = model_.jumps.law(j);
        return law.scale.max_abs() == 0.0 || (law.alpha == 0.0 && law.beta == 0.0);
    }

    const Model& model_;
    const TerminalTarget& target_;
    ControlPair base_;
    TimeGrid grid_;
    SkeletonOptions sk_;
    std::vector<Param> params_;
    double theta_max_ = 0.0;
};

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double inf_norm(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

struct StageResult {
    std::vector<double> theta;
    RateStage stage;
    std::size_t evaluations = 0;
};

StageResult lbfgs_stage(const Problem& pb, std::vector<double> x, double mu, const RateOptions& opts) {
    StageResult out;
    out.stage.penalty = mu;
    const std::size_t n = x.size();
    Eval fx = pb.evaluate(x, mu);
    ++out.evaluations;
    if (n == 0) {
        out.stage.stationary = true;
        out.stage.objective = fx.objective;
        out.stage.cost = fx.cost;
        out.stage.residual = fx.residual;
        out.theta = std::move(x);
        return out;
    }
    std::vector<double> g = pb.gradient(x, mu, opts.fd_step);
    out.evaluations += 2 * n;
    std::deque<std::pair<std::vector<double>, std::vector<double>>> hist;
    std::size_t flat_steps = 0;

    std::size_t it = 0;
    for (; it < opts.max_iter; ++it) {
        const double gnorm = inf_norm(g);
        out.stage.grad_norm = gnorm;
        if (gnorm <= opts.grad_tol * std::max(1.0, std::abs(fx.objective))) {
            out.stage.stationary = true;
            break;
        }
        // two-loop recursion
        std::vector<double> d = g;
        std::vector<double> alphas(hist.size());
        for (std::size_t h = hist.size(); h-- > 0;) {
            const auto& [s, y] = hist[h];
            alphas[h] = dotv(s, d) / dotv(y, s);
            for (std::size_t i = 0; i < n; ++i) d[i] -= alphas[h] * y[i];
        }
        if (!hist.empty()) {
            const auto& [s, y] = hist.back();
            const double gamma = dotv(s, y) / dotv(y, y);
            for (double& v : d) v *= gamma;
        } else {
            const double scale = std::min(1.0, 1.0 / gnorm);
            for (double& v : d) v *= scale;
        }
        for (std::size_t h = 0; h < hist.size(); ++h) {
            const auto& [s, y] = hist[h];
            const double beta = dotv(y, d) / dotv(y, s);
            for (std::size_t i = 0; i < n; ++i) d[i] += s[i] * (alphas[h] - beta);
        }
        for (double& v : d) v = -v;
        double slope = dotv(d, g);
        if (!(slope < 0.0)) {
            hist.clear();
            d = g;
            const double scale = std::min(1.0, 1.0 / gnorm);
            for (double& v : d) v *= -scale;
            slope = dotv(d, g);
        }

        double step = 1.0;
        bool accepted = false;
        std::vector<double> xn(n);
        Eval fn;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step * d[i];
            fn = pb.evaluate(xn, mu);
            ++out.evaluations;
            if (fn.objective <= fx.objective + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!hist.empty()) {
                hist.clear();
                continue;
            }
            out.stage.stationary = true;  // no descent left at the resolution of the gradient
            break;
        }
        std::vector<double> gn = pb.gradient(xn, mu, opts.fd_step);
        out.evaluations += 2 * n;
        std::vector<double> s(n);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = xn[i] - x[i];
            y[i] = gn[i] - g[i];
        }
        const double sy = dotv(s, y);
        if (sy > 1e-12 * std::sqrt(dotv(s, s) * dotv(y, y))) {
            hist.emplace_back(std::move(s), std::move(y));
            if (hist.size() > opts.memory) hist.pop_front();
        }
        const double decrease = fx.objective - fn.objective;
        flat_steps = decrease <= 1e-15 * std::max(1.0, std::abs(fx.objective)) ? flat_steps + 1 : 0;
        x = std::move(xn);
        fx = fn;
        g = std::move(gn);
        if (flat_steps >= 3) {
            out.stage.stationary = true;
            break;
        }
    }
    out.stage.iterations = it;
    out.stage.objective = fx.objective;
    out.stage.cost = fx.cost;
    out.stage.residual = fx.residual;
    out.theta = std::move(x);
    return out;
}

}  // namespace

RateEstimate minimize_rate(const Model& model, const TerminalTarget& target, const ControlPair& init,
                           const RateOptions& opts) {
    model.validate();
    if (init.modes() != model.modes() || init.marks() != model.marks.size())
        throw std::invalid_argument("minimize_rate: initial control does not match the model");
    if (std::abs(init.horizon() - model.horizon) > 1e-12 * model.horizon)
        throw std::invalid_argument("minimize_rate: initial control horizon differs from the model horizon");
    if (opts.penalties.empty()) throw std::invalid_argument("minimize_rate: need at least one penalty stage");
    if (target.kind != TerminalTarget::Kind::half_space && target.centre.size() != model.modes())
        throw std::invalid_argument("minimize_rate: target has wrong mode count");

    const Problem pb(model, target, init, opts);
    std::vector<double> theta = pb.initial();
    RateEstimate est;
    bool last_stationary = true;
    for (double mu : opts.penalties) {
        StageResult st = lbfgs_stage(pb, theta, mu, opts);
        est.evaluations += st.evaluations;
        est.trace.push_back(st.stage);
        theta = std::move(st.theta);
        last_stationary = st.stage.stationary;
    }
    est.minimizer = pb.build(theta);
    est.cost = cost_of_control(est.minimizer, model.marks);
    est.terminal = pb.terminal(est.minimizer);
    est.penalty_residual = target.distance(est.terminal);
    if (est.penalty_residual > opts.residual_tol) {
        if (!last_stationary) {
            std::vector<double> history;
            for (const auto& s : est.trace) history.push_back(s.residual);
            throw NonConvergence("minimize_rate: iteration budget exhausted with terminal residual " +
                                     std::to_string(est.penalty_residual),
                                 history);
        }
        est.infinite = true;
        est.value = std::numeric_limits<double>::infinity();
    } else {
        est.value = est.cost.total;
    }
    return est;
}

}  // namespace ldplab
