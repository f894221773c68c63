#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ldplab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    bool overlaps(const Interval& o) const noexcept { return lo <= o.hi && o.lo <= hi; }
};

/// Welford accumulator; merge() is associative up to rounding.
class RunningStats {
public:
    void add(double x) noexcept;
    void merge(const RunningStats& other) noexcept;

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept;  // unbiased
    double std_error() const noexcept;
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double min_ = 0.0;
    double max_ = 0.0;
};

double normal_cdf(double x);
/// 1 - Phi(x) without cancellation.
double normal_sf(double x);
double normal_quantile(double p);

/// Wilson score interval for hits out of n at the given two-sided confidence.
/// With zero hits returns the one-sided exact bound [0, 1 - (1 - conf)^{1/n}].
Interval wilson_interval(std::size_t hits, std::size_t n, double confidence = 0.95);

/// mean +- z * se
Interval normal_interval(double mean, double se, double confidence = 0.95);

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 0.0;
    std::size_t bins = 0;
};

/// Pearson test of observed counts against expected probabilities (bins merged until every
/// expected count is at least min_expected).
ChiSquareResult chi_square_gof(const std::vector<std::size_t>& observed, const std::vector<double>& probabilities,
                               double min_expected = 5.0);

/// Pearson test of integer samples against Poisson(mean).
ChiSquareResult poisson_gof(const std::vector<std::size_t>& samples, double mean);

/// Two-sample Kolmogorov-Smirnov statistic with its asymptotic p-value.
struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y = intercept + slope * x (needs two distinct x).
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Least squares for y = X beta with X given row-major (rows x cols), solved by normal equations.
std::vector<double> least_squares(const std::vector<double>& design, std::size_t cols, const std::vector<double>& y);

double median(std::vector<double> v);

}  // namespace ldplab
