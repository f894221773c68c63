#include "ldplab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>

namespace ldplab {

void RunningStats::add(double x) noexcept {
    if (n_ == 0) {
        min_ = max_ = x;
    } else {
        min_ = std::min(min_, x);
        max_ = std::max(max_, x);
    }
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) noexcept {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double d = o.mean_ - mean_;
    const double n = na + nb;
    mean_ += d * nb / n;
    m2_ += o.m2_ + d * d * na * nb / n;
    n_ += o.n_;
    min_ = std::min(min_, o.min_);
    max_ = std::max(max_, o.max_);
}

double RunningStats::variance() const noexcept {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::std_error() const noexcept {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

Interval wilson_interval(std::size_t hits, std::size_t n, double confidence) {
    if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
    if (hits > n) throw std::invalid_argument("wilson_interval: hits exceed n");
    if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("wilson_interval: bad confidence");
    const double nn = static_cast<double>(n);
    if (hits == 0) return {0.0, 1.0 - std::pow(1.0 - confidence, 1.0 / nn)};
    const double z = normal_quantile(0.5 + 0.5 * confidence);
    const double p = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
    return {std::max(0.0, std::min(centre - half, p)), std::min(1.0, std::max(centre + half, p))};
}

Interval normal_interval(double mean, double se, double confidence) {
    const double z = normal_quantile(0.5 + 0.5 * confidence);
    return {mean - z * se, mean + z * se};
}

ChiSquareResult chi_square_gof(const std::vector<std::size_t>& observed, const std::vector<double>& probabilities,
                               double min_expected) {
    if (observed.size() != probabilities.size() || observed.empty())
        throw std::invalid_argument("chi_square_gof: observed and probabilities must have equal nonzero length");
    double total = 0.0;
    for (auto o : observed) total += static_cast<double>(o);
    if (!(total > 0.0)) throw std::invalid_argument("chi_square_gof: no observations");

    // merge adjacent bins left to right; a short remainder joins the last merged bin
    std::vector<double> obs;
    std::vector<double> expct;
    double o_acc = 0.0;
    double e_acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o_acc += static_cast<double>(observed[i]);
        e_acc += probabilities[i] * total;
        if (e_acc >= min_expected) {
            obs.push_back(o_acc);
            expct.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (obs.empty()) {
            obs.push_back(o_acc);
            expct.push_back(e_acc);
        } else {
            obs.back() += o_acc;
            expct.back() += e_acc;
        }
    }
    ChiSquareResult r;
    r.bins = obs.size();
    if (r.bins < 2) {
        r.p_value = 1.0;
        return r;
    }
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (expct[i] <= 0.0) continue;
        const double d = obs[i] - expct[i];
        r.statistic += d * d / expct[i];
    }
    r.dof = r.bins - 1;
    r.p_value = boost::math::cdf(
        boost::math::complement(boost::math::chi_squared_distribution<double>(static_cast<double>(r.dof)), r.statistic));
    return r;
}

ChiSquareResult poisson_gof(const std::vector<std::size_t>& samples, double mean) {
    if (!(mean > 0.0)) throw std::invalid_argument("poisson_gof: mean must be > 0");
    if (samples.empty()) throw std::invalid_argument("poisson_gof: no samples");
    const boost::math::poisson_distribution<double> law(mean);
    const std::size_t top = static_cast<std::size_t>(*std::max_element(samples.begin(), samples.end()));
    const std::size_t bins = std::max<std::size_t>(top, static_cast<std::size_t>(mean + 10.0 * std::sqrt(mean) + 10)) + 1;
    std::vector<std::size_t> observed(bins, 0);
    for (auto s : samples) ++observed[s];
    std::vector<double> probs(bins);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < bins; ++i) {
        probs[i] = boost::math::pdf(law, static_cast<double>(i));
        acc += probs[i];
    }
    probs.back() = std::max(0.0, 1.0 - acc);  // upper tail folded into the last bin
    return chi_square_gof(observed, probs);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double q = 0.0;
    if (lambda < 0.2) {
        q = 1.0;
    } else {
        for (int k = 1; k <= 100; ++k) {
            const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
            q += term;
            if (std::abs(term) < 1e-12) break;
        }
    }
    return {d, std::clamp(q, 0.0, 1.0)};
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("linear_fit: x values are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double sse = std::max(0.0, syy - f.slope * sxy);
    f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    f.slope_se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    return f;
}

std::vector<double> least_squares(const std::vector<double>& design, std::size_t cols, const std::vector<double>& y) {
    if (cols == 0 || design.size() != y.size() * cols || y.size() < cols)
        throw std::invalid_argument("least_squares: inconsistent dimensions");
    const std::size_t rows = y.size();
    // normal equations with partial pivoting
    std::vector<double> m(cols * (cols + 1), 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < cols; ++i) {
            for (std::size_t j = 0; j < cols; ++j) m[i * (cols + 1) + j] += design[r * cols + i] * design[r * cols + j];
            m[i * (cols + 1) + cols] += design[r * cols + i] * y[r];
        }
    for (std::size_t c = 0; c < cols; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < cols; ++r)
            if (std::abs(m[r * (cols + 1) + c]) > std::abs(m[piv * (cols + 1) + c])) piv = r;
        if (std::abs(m[piv * (cols + 1) + c]) < 1e-300) throw std::invalid_argument("least_squares: singular design");
        if (piv != c)
            for (std::size_t j = 0; j <= cols; ++j) std::swap(m[c * (cols + 1) + j], m[piv * (cols + 1) + j]);
        for (std::size_t r = 0; r < cols; ++r) {
            if (r == c) continue;
            const double f = m[r * (cols + 1) + c] / m[c * (cols + 1) + c];
            for (std::size_t j = c; j <= cols; ++j) m[r * (cols + 1) + j] -= f * m[c * (cols + 1) + j];
        }
    }
    std::vector<double> beta(cols);
    for (std::size_t i = 0; i < cols; ++i) beta[i] = m[i * (cols + 1) + cols] / m[i * (cols + 1) + i];
    return beta;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty input");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    if (v.size() % 2) return v[mid];
    const double hi = v[mid];
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace ldplab
