#pragma once

#include <span>
#include <string>

#include <json.hpp>

namespace revperf {

enum class ParametricFamily { probit, logit };

std::string to_string(ParametricFamily family);
ParametricFamily parametric_family_from_string(const std::string& name);

/// F(b) = CDF((b - mu) / sigma) for the standard normal or logistic CDF.
/// A degenerate fit (nonpositive slope) keeps mu = mean(b) as a step threshold
/// and sigma = 0.
struct ParametricFit {
  ParametricFamily family = ParametricFamily::probit;
  double mu = 0.0;
  double sigma = 1.0;
  bool degenerate = false;
  double epsilon_clip = 1e-6;

  nlohmann::json to_json() const;
  static ParametricFit from_json(const nlohmann::json& j);
};

inline constexpr double kQuantileClip = 1e-6;

/// Regresses phi_m = quantile(clip(pi_m)) on b_m: slope beta, sigma = 1/beta,
/// mu = mean(b) - sigma * mean(phi). Throws ArgumentError when all b are equal.
ParametricFit fit_parametric(ParametricFamily family, std::span<const double> b, std::span<const double> proportions,
                             double epsilon_clip = kQuantileClip);

/// Throws DegenerateModelError on a degenerate fit.
double predict_parametric(const ParametricFit& fit, double b);

/// predict_parametric, falling back to the step 1{b >= mu} for degenerate fits.
double predict_parametric_or_step(const ParametricFit& fit, double b);

}  // namespace revperf
