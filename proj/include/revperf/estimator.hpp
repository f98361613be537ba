#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "revperf/monotone_fit.hpp"
#include "revperf/parametric.hpp"

namespace revperf {

/// How the cost CDF F_C is learned from (b_m, pi_m, n_m) observations.
/// `oracle` returns the true CDF and exists for control runs.
enum class EstimatorKind { isotonic, parametric_probit, parametric_logit, oracle };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& name);

/// Uniform convergence exponent eta of the estimator (isotonic 1/3, parametric 1/2).
double default_eta(EstimatorKind kind);

struct CdfEstimate {
  std::function<double(double)> cdf;
  std::optional<MonotoneFit> isotonic;
  std::optional<ParametricFit> parametric;

  double operator()(double b) const { return cdf(b); }
};

CdfEstimate estimate_cdf(EstimatorKind kind, std::span<const UnivariateObservation> observations,
                         const std::function<double(double)>& truth = {});

}  // namespace revperf
