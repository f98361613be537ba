#pragma once

#include <functional>
#include <string>

namespace revperf {

/// A univariate law given by its CDF and (generalized) quantile function.
struct UnivariateDistribution {
  std::string name;
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;

  static UnivariateDistribution uniform(double lo = 0.0, double hi = 1.0);
  /// CDF x^k on [0, 1] (Beta(k, 1)).
  static UnivariateDistribution power(double k);
  static UnivariateDistribution probit(double mu, double sigma);
  static UnivariateDistribution logit(double mu, double scale);
};

}  // namespace revperf
