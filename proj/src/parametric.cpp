#include "revperf/parametric.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "revperf/errors.hpp"
#include "revperf/numerics.hpp"

namespace revperf {

std::string to_string(ParametricFamily family) {
  return family == ParametricFamily::probit ? "probit" : "logit";
}

ParametricFamily parametric_family_from_string(const std::string& name) {
  if (name == "probit") return ParametricFamily::probit;
  if (name == "logit") return ParametricFamily::logit;
  throw ArgumentError("unknown parametric family '" + name + "'");
}

nlohmann::json ParametricFit::to_json() const {
  return {{"family", to_string(family)}, {"mu", mu}, {"sigma", sigma}, {"degenerate", degenerate}};
}

ParametricFit ParametricFit::from_json(const nlohmann::json& j) {
  ParametricFit fit;
  fit.family = parametric_family_from_string(j.at("family").get<std::string>());
  fit.mu = j.at("mu").get<double>();
  fit.sigma = j.at("sigma").get<double>();
  fit.degenerate = j.at("degenerate").get<bool>();
  return fit;
}

ParametricFit fit_parametric(ParametricFamily family, std::span<const double> b, std::span<const double> proportions,
                             double epsilon_clip) {
  if (b.size() != proportions.size()) throw ArgumentError("fit_parametric: b and proportions differ in length");
  if (b.size() < 2) throw ArgumentError("fit_parametric: need at least 2 observations");
  if (!(epsilon_clip > 0.0 && epsilon_clip < 0.5)) throw ArgumentError("fit_parametric: clip must lie in (0, 0.5)");
  const auto quantile = family == ParametricFamily::probit ? normal_quantile : logistic_quantile;

  std::vector<double> phi(b.size());
  for (std::size_t m = 0; m < b.size(); ++m) {
    phi[m] = quantile(std::clamp(proportions[m], epsilon_clip, 1.0 - epsilon_clip));
  }
  const double b_bar = mean(b);
  const double phi_bar = mean(phi);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t m = 0; m < b.size(); ++m) {
    sxy += (b[m] - b_bar) * (phi[m] - phi_bar);
    sxx += (b[m] - b_bar) * (b[m] - b_bar);
  }
  if (sxx == 0.0) throw ArgumentError("fit_parametric: all benefit gaps are equal, slope undefined");

  ParametricFit fit;
  fit.family = family;
  fit.epsilon_clip = epsilon_clip;
  const double slope = sxy / sxx;
  if (slope > 0.0) {
    fit.sigma = 1.0 / slope;
    fit.mu = b_bar - fit.sigma * phi_bar;
  } else {
    fit.degenerate = true;
    fit.sigma = 0.0;
    fit.mu = b_bar;
  }
  return fit;
}

double predict_parametric(const ParametricFit& fit, double b) {
  if (fit.degenerate) throw DegenerateModelError("predict_parametric: fit is degenerate (nonpositive slope)");
  const double z = (b - fit.mu) / fit.sigma;
  return fit.family == ParametricFamily::probit ? normal_cdf(z) : logistic_cdf(z);
}

double predict_parametric_or_step(const ParametricFit& fit, double b) {
  if (fit.degenerate) return b >= fit.mu ? 1.0 : 0.0;
  return predict_parametric(fit, b);
}

}  // namespace revperf
