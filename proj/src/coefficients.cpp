#include "ldplab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ldplab/random.hpp"

namespace ldplab {

// ---------------------------------------------------------------- MarkMeasure

MarkMeasure::MarkMeasure(std::vector<std::string> labels, std::vector<double> weights)
    : labels_(std::move(labels)), weights_(std::move(weights)) {
    if (weights_.empty()) throw std::invalid_argument("MarkMeasure: at least one mark required");
    if (labels_.size() != weights_.size()) throw std::invalid_argument("MarkMeasure: label/weight count mismatch");
    for (std::size_t j = 0; j < weights_.size(); ++j)
        if (!(weights_[j] > 0.0) || !std::isfinite(weights_[j]))
            throw std::invalid_argument("MarkMeasure: weight of mark '" + labels_[j] +
                                        "' must be positive and finite");
}

namespace {

std::vector<std::string> default_labels(std::size_t m) {
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < m; ++j) labels.push_back("v" + std::to_string(j + 1));
    return labels;
}

}  // namespace

MarkMeasure::MarkMeasure(std::vector<double> weights)
    : MarkMeasure(default_labels(weights.size()), std::vector<double>(weights)) {}

double MarkMeasure::total_mass() const noexcept {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
}

// ------------------------------------------------------- DiffusionCoefficient

DiffusionCoefficient::DiffusionCoefficient(std::vector<PiecewiseConstant> a, std::vector<double> b, double clip)
    : a_(std::move(a)), b_(std::move(b)), clip_(clip) {
    if (a_.empty()) throw std::invalid_argument("DiffusionCoefficient: at least one mode required");
    if (a_.size() != b_.size()) throw std::invalid_argument("DiffusionCoefficient: a and b sizes differ");
    if (!(clip_ > 0.0)) throw std::invalid_argument("DiffusionCoefficient: clip bound must be > 0");
    for (double v : b_)
        if (!std::isfinite(v)) throw std::invalid_argument("DiffusionCoefficient: non-finite b");
}

DiffusionCoefficient DiffusionCoefficient::zero(std::size_t modes) {
    return DiffusionCoefficient(std::vector<PiecewiseConstant>(modes, PiecewiseConstant(0.0)),
                                std::vector<double>(modes, 0.0));
}

double DiffusionCoefficient::singular_value(double t, const SpectralField& u, std::size_t k) const {
    return std::clamp(a_[k](t) + b_[k] * u[k], -clip_, clip_);
}

SpectralField DiffusionCoefficient::apply(double t, const SpectralField& u, const SpectralField& w) const {
    SpectralField out(modes());
    for (std::size_t k = 0; k < modes(); ++k) out[k] = singular_value(t, u, k) * w[k];
    return out;
}

double DiffusionCoefficient::hs_norm_squared(double t, const SpectralField& u) const {
    double s = 0.0;
    for (std::size_t k = 0; k < modes(); ++k) {
        const double v = singular_value(t, u, k);
        s += v * v;
    }
    return s;
}

double DiffusionCoefficient::hs_distance_squared(double t, const SpectralField& u1, const SpectralField& u2) const {
    double s = 0.0;
    for (std::size_t k = 0; k < modes(); ++k) {
        const double d = singular_value(t, u1, k) - singular_value(t, u2, k);
        s += d * d;
    }
    return s;
}

bool DiffusionCoefficient::is_additive() const noexcept {
    return std::all_of(b_.begin(), b_.end(), [](double v) { return v == 0.0; });
}

bool DiffusionCoefficient::is_zero() const noexcept {
    if (!is_additive()) return false;
    return std::all_of(a_.begin(), a_.end(), [](const PiecewiseConstant& p) { return p.max_abs() == 0.0; });
}

// ------------------------------------------------------------ JumpCoefficient

JumpCoefficient::JumpCoefficient(std::vector<JumpLaw> laws) : laws_(std::move(laws)) {
    if (laws_.empty()) throw std::invalid_argument("JumpCoefficient: at least one mark required");
    const std::size_t modes = laws_.front().direction.size();
    for (std::size_t j = 0; j < laws_.size(); ++j) {
        const auto& law = laws_[j];
        if (law.direction.size() != modes || modes == 0)
            throw std::invalid_argument("JumpCoefficient: direction mode count mismatch for mark " +
                                        std::to_string(j + 1));
        if (!std::isfinite(law.alpha) || !std::isfinite(law.beta))
            throw std::invalid_argument("JumpCoefficient: non-finite alpha/beta");
        const double n = law.direction.h_norm();
        if (law.alpha != 0.0 && std::abs(n - 1.0) > 1e-12)
            throw std::invalid_argument("JumpCoefficient: direction of mark " + std::to_string(j + 1) +
                                        " must be a unit field");
    }
}

JumpCoefficient JumpCoefficient::zero(std::size_t modes, std::size_t marks) {
    std::vector<JumpLaw> laws(marks, JumpLaw{PiecewiseConstant(0.0), 0.0, 0.0, SpectralField::unit(modes, 0)});
    return JumpCoefficient(std::move(laws));
}

SpectralField JumpCoefficient::evaluate(double t, const SpectralField& u, std::size_t j) const {
    SpectralField out(u.size());
    accumulate(t, u, j, 1.0, out);
    return out;
}

void JumpCoefficient::accumulate(double t, const SpectralField& u, std::size_t j, double weight,
                                 SpectralField& out) const {
    const auto& law = laws_[j];
    const double c = law.scale(t) * weight;
    if (c == 0.0) return;
    const double ca = c * law.alpha;
    const double cb = c * law.beta;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += ca * law.direction[k] + cb * u[k];
}

bool JumpCoefficient::is_zero() const noexcept {
    return std::all_of(laws_.begin(), laws_.end(), [](const JumpLaw& l) {
        return l.scale.max_abs() == 0.0 || (l.alpha == 0.0 && l.beta == 0.0);
    });
}

// ---------------------------------------------------------------------- Model

void Model::validate() const {
    const std::size_t k = eigen.modes();
    if (diffusion.modes() != k) throw std::invalid_argument("Model: diffusion mode count differs from eigen-system");
    if (jumps.law(0).direction.size() != k)
        throw std::invalid_argument("Model: jump direction mode count differs from eigen-system");
    if (jumps.marks() != marks.size()) throw std::invalid_argument("Model: jump laws and mark weights differ in count");
    if (x0.size() != k) throw std::invalid_argument("Model: x0 mode count differs from eigen-system");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("Model: horizon must be > 0");
    for (double v : majorant.values())
        if (v < 0.0) throw std::invalid_argument("Model: majorant K(t) must be >= 0");
}

Model Model::noiseless() const {
    Model m = *this;
    m.diffusion = DiffusionCoefficient::zero(modes());
    m.jumps = JumpCoefficient::zero(modes(), marks.size());
    m.majorant = PiecewiseConstant(0.0);
    return m;
}

std::vector<double> coefficient_knots(const Model& model) {
    std::vector<double> knots{0.0, model.horizon};
    auto add = [&](const PiecewiseConstant& p) {
        for (double t : p.knots())
            if (t > 0.0 && t < model.horizon) knots.push_back(t);
    };
    for (const auto& a : model.diffusion.a()) add(a);
    for (const auto& law : model.jumps.laws()) add(law.scale);
    add(model.majorant);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    return knots;
}

namespace {

std::vector<double> knots_of(const DiffusionCoefficient& dc, const JumpCoefficient& jc, double horizon) {
    std::vector<double> knots{0.0};
    for (const auto& a : dc.a())
        for (double t : a.knots())
            if (t < horizon) knots.push_back(t);
    for (const auto& law : jc.laws())
        for (double t : law.scale.knots())
            if (t < horizon) knots.push_back(t);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    return knots;
}

}  // namespace

PiecewiseConstant default_majorant(const DiffusionCoefficient& dc, const JumpCoefficient& jc, const MarkMeasure& mm,
                                   double horizon) {
    if (jc.marks() != mm.size()) throw std::invalid_argument("default_majorant: mark count mismatch");
    double b_max2 = 0.0;
    for (double b : dc.b()) b_max2 = std::max(b_max2, b * b);

    auto value_at = [&](double t) {
        double k = b_max2;
        for (const auto& a : dc.a()) k += a(t) * a(t);
        for (std::size_t j = 0; j < jc.marks(); ++j) {
            const auto& law = jc.law(j);
            const double c = law.scale(t);
            k += c * c * (law.alpha * law.alpha + law.beta * law.beta) * mm.weight(j);
        }
        return k;
    };

    std::vector<double> knots = knots_of(dc, jc, horizon);
    if (knots.size() == 1) return PiecewiseConstant(value_at(0.0));
    std::vector<double> values;
    for (double t : knots) values.push_back(value_at(t));
    knots.push_back(horizon);
    return PiecewiseConstant(std::move(knots), std::move(values));
}

// -------------------------------------------------------------------- norms

GNorms g_norms(const JumpCoefficient& jc, double t, std::size_t j) {
    if (j >= jc.marks()) throw std::out_of_range("g_norms: mark index out of range");
    const auto& law = jc.law(j);
    const double c = std::abs(law.scale(t));
    // sup_r (|alpha| + |beta| r) / (1 + r) is attained at r = 0 or r -> infinity
    return GNorms{c * std::max(std::abs(law.alpha), std::abs(law.beta)), c * std::abs(law.beta), false};
}

GNorms estimate_g_norms(const JumpFunction& g, double t, std::size_t modes, std::size_t samples, std::uint64_t seed) {
    CounterRng rng(StreamKey{seed, 0, Purpose::conditions});
    std::normal_distribution<double> normal;
    auto random_field = [&](double radius) {
        SpectralField u(modes);
        for (std::size_t k = 0; k < modes; ++k) u[k] = normal(rng);
        const double n = u.h_norm();
        if (n > 0.0) u *= radius / n;
        return u;
    };
    GNorms out;
    out.estimated = true;
    out.zero_norm = g(t, SpectralField(modes)).h_norm();
    for (std::size_t s = 0; s < samples; ++s) {
        const double r1 = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
        const SpectralField u1 = random_field(r1);
        const SpectralField g1 = g(t, u1);
        out.zero_norm = std::max(out.zero_norm, g1.h_norm() / (1.0 + r1));
        const SpectralField d = random_field(std::pow(10.0, -3.0 + 6.0 * rng.uniform()));
        const SpectralField u2 = u1 + d;
        const double dn = d.h_norm();
        if (dn > 0.0) out.one_norm = std::max(out.one_norm, (g(t, u2) - g1).h_norm() / dn);
    }
    return out;
}

// ------------------------------------------------------------ condition check

ConditionReport check_conditions(const Model& model, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples == 0) throw std::invalid_argument("check_conditions: n_samples must be >= 1");
    const std::size_t modes = model.modes();
    CounterRng rng(StreamKey{seed, 0, Purpose::conditions});
    std::normal_distribution<double> normal;
    const std::vector<double> knots = coefficient_knots(model);

    auto random_field = [&](double radius) {
        SpectralField u(modes);
        for (std::size_t k = 0; k < modes; ++k) u[k] = normal(rng);
        const double n = u.h_norm();
        if (n > 0.0) u *= radius / n;
        return u;
    };

    ConditionReport report;
    report.samples = n_samples;
    report.growth.name = "growth";
    report.lipschitz.name = "lipschitz";

    auto ratio = [](double lhs, double rhs) {
        if (lhs == 0.0) return 0.0;
        if (rhs <= 0.0) return std::numeric_limits<double>::infinity();
        return lhs / rhs;
    };

    for (std::size_t s = 0; s < n_samples; ++s) {
        // deterministic coverage first: every coefficient piece at u = 0
        const bool sweep = s < knots.size() - 1;
        const double t = sweep ? knots[s] : model.horizon * rng.uniform();
        const double r1 = sweep ? 0.0 : std::pow(10.0, -3.0 + 6.0 * rng.uniform());
        const SpectralField u1 = random_field(r1);
        const double kt = model.majorant(t);

        double lhs = model.diffusion.hs_norm_squared(t, u1);
        for (std::size_t j = 0; j < model.marks.size(); ++j)
            lhs += model.jumps.evaluate(t, u1, j).h_norm_squared() * model.marks.weight(j);
        const double g_ratio = ratio(lhs, kt * (1.0 + u1.h_norm_squared()));
        if (g_ratio > report.growth.max_ratio || s == 0) {
            report.growth.max_ratio = g_ratio;
            report.growth.worst_time = t;
            report.growth.worst_norm = u1.h_norm();
        }

        const SpectralField d = random_field(std::pow(10.0, -3.0 + 6.0 * rng.uniform()));
        const SpectralField u2 = u1 + d;
        double dl = model.diffusion.hs_distance_squared(t, u1, u2);
        for (std::size_t j = 0; j < model.marks.size(); ++j)
            dl += (model.jumps.evaluate(t, u1, j) - model.jumps.evaluate(t, u2, j)).h_norm_squared() *
                  model.marks.weight(j);
        const double l_ratio = ratio(dl, kt * d.h_norm_squared());
        if (l_ratio > report.lipschitz.max_ratio || s == 0) {
            report.lipschitz.max_ratio = l_ratio;
            report.lipschitz.worst_time = t;
            report.lipschitz.worst_norm = d.h_norm();
        }
    }

    for (InequalityCheck* c : {&report.growth, &report.lipschitz}) {
        c->satisfied = c->max_ratio <= 1.0 + kConditionSlack;
        if (!c->satisfied) report.violated.push_back(c->name);
    }
    report.satisfied = report.violated.empty();
    return report;
}

// --------------------------------------------------- exponential integrability

namespace {

/// Integrates fn(t_left) over the pieces of the merged knot partition of the jump scales.
template <class F>
double integrate_over_scales(const Model& model, F&& fn) {
    std::vector<double> knots{0.0, model.horizon};
    for (const auto& law : model.jumps.laws())
        for (double t : law.scale.knots())
            if (t > 0.0 && t < model.horizon) knots.push_back(t);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) s += fn(knots[i]) * (knots[i + 1] - knots[i]);
    return s;
}

double norm_of(const GNorms& n, int which) { return which == 0 ? n.zero_norm : n.one_norm; }

}  // namespace

double check_exp_integrability(const Model& model, double delta, int which, int power) {
    if (!(delta > 0.0)) throw std::invalid_argument("check_exp_integrability: delta must be > 0");
    if (which != 0 && which != 1) throw std::invalid_argument("check_exp_integrability: which must be 0 or 1");
    if (power != 1 && power != 2) throw std::invalid_argument("check_exp_integrability: power must be 1 or 2");
    return integrate_over_scales(model, [&](double t) {
        double s = 0.0;
        for (std::size_t j = 0; j < model.marks.size(); ++j) {
            const double a = norm_of(g_norms(model.jumps, t, j), which);
            s += std::exp(delta * (power == 2 ? a * a : a)) * model.marks.weight(j);
        }
        return s;
    });
}

Lemma34Bounds lemma34_bounds(const Model& model, double budget, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("lemma34_bounds: sigma must be > 0");
    if (!(budget >= 0.0)) throw std::invalid_argument("lemma34_bounds: budget must be >= 0");
    Lemma34Bounds out;
    for (int i = 0; i < 2; ++i) {
        bool nonzero = false;
        // a^2 g <= (e^{sigma a^2} - 1 + l(g)) / sigma
        const double sq = integrate_over_scales(model, [&](double t) {
            double s = 0.0;
            for (std::size_t j = 0; j < model.marks.size(); ++j) {
                const double a = norm_of(g_norms(model.jumps, t, j), i);
                if (a > 0.0) nonzero = true;
                s += (a * a + std::expm1(sigma * a * a) / sigma) * model.marks.weight(j);
            }
            return s;
        });
        // a |g - 1| <= a + (e^{sigma a} - 1 - sigma a + l(g)) / sigma
        const double lin = integrate_over_scales(model, [&](double t) {
            double s = 0.0;
            for (std::size_t j = 0; j < model.marks.size(); ++j) {
                const double a = norm_of(g_norms(model.jumps, t, j), i);
                s += (a + (std::expm1(sigma * a) - sigma * a) / sigma) * model.marks.weight(j);
            }
            return s;
        });
        const double budget_term = nonzero ? budget / sigma : 0.0;
        out.c_2[i] = sq + budget_term;
        out.c_1[i] = lin + budget_term;
    }
    return out;
}

Lemma34Integrals lemma34_integrals(const Model& model, const ControlPair& q) {
    if (q.marks() != model.marks.size()) throw std::invalid_argument("lemma34_integrals: mark count mismatch");
    std::vector<double> knots = coefficient_knots(model);
    for (double t : q.partition().nodes())
        if (t > 0.0 && t < model.horizon) knots.push_back(t);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    Lemma34Integrals out;
    for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
        const double t = knots[p];
        const double mid = 0.5 * (knots[p] + knots[p + 1]);
        const double dt = knots[p + 1] - knots[p];
        for (std::size_t j = 0; j < model.marks.size(); ++j) {
            const GNorms n = g_norms(model.jumps, t, j);
            const double g = q.g_at(mid, j);
            const double w = model.marks.weight(j) * dt;
            for (int i = 0; i < 2; ++i) {
                const double a = norm_of(n, i);
                out.c_2[i] += a * a * (g + 1.0) * w;
                out.c_1[i] += a * std::abs(g - 1.0) * w;
            }
        }
    }
    return out;
}

}  // namespace ldplab
