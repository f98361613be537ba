#pragma once

#include <span>
#include <string>
#include <vector>

namespace revperf {

double normal_cdf(double x);
/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);
double logistic_cdf(double x);
double logistic_quantile(double p);

/// `count` equispaced points on [lo, hi], both endpoints included.
std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Trapezoid rule for samples `f` taken at the abscissae `x`.
double trapezoid(std::span<const double> x, std::span<const double> f);

double median(std::vector<double> values);
double mean(std::span<const double> values);

/// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> x, std::span<const double> y);

/// Round-trip ("%.17g") formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace revperf
