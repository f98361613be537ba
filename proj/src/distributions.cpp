#include "revperf/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "revperf/errors.hpp"
#include "revperf/numerics.hpp"

namespace revperf {

namespace {
std::string describe(const char* family, double a, double b) {
  std::ostringstream os;
  os << family << '(' << a << ", " << b << ')';
  return os.str();
}
}  // namespace

UnivariateDistribution UnivariateDistribution::uniform(double lo, double hi) {
  if (!(hi > lo)) throw ArgumentError("uniform: need hi > lo");
  return {describe("uniform", lo, hi),
          [lo, hi](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); },
          [lo, hi](double u) { return lo + (hi - lo) * u; }};
}

UnivariateDistribution UnivariateDistribution::power(double k) {
  if (!(k > 0.0)) throw ArgumentError("power: exponent must be positive");
  return {describe("power", k, 1.0),
          [k](double x) { return x <= 0.0 ? 0.0 : x >= 1.0 ? 1.0 : std::pow(x, k); },
          [k](double u) { return std::pow(u, 1.0 / k); }};
}

UnivariateDistribution UnivariateDistribution::probit(double mu, double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("probit: sigma must be positive");
  return {describe("probit", mu, sigma),
          [mu, sigma](double x) { return normal_cdf((x - mu) / sigma); },
          [mu, sigma](double u) { return mu + sigma * normal_quantile(u); }};
}

UnivariateDistribution UnivariateDistribution::logit(double mu, double scale) {
  if (!(scale > 0.0)) throw ArgumentError("logit: scale must be positive");
  return {describe("logit", mu, scale),
          [mu, scale](double x) { return logistic_cdf((x - mu) / scale); },
          [mu, scale](double u) { return mu + scale * logistic_quantile(u); }};
}

}  // namespace revperf
