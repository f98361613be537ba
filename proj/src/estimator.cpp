#include "revperf/estimator.hpp"

#include <memory>
#include <vector>

#include "revperf/errors.hpp"

namespace revperf {

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::isotonic:
      return "isotonic";
    case EstimatorKind::parametric_probit:
      return "parametric-probit";
    case EstimatorKind::parametric_logit:
      return "parametric-logit";
    case EstimatorKind::oracle:
      return "oracle";
  }
  return "unknown";
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
  for (auto k : {EstimatorKind::isotonic, EstimatorKind::parametric_probit, EstimatorKind::parametric_logit,
                 EstimatorKind::oracle}) {
    if (to_string(k) == name) return k;
  }
  throw ArgumentError("unknown estimator '" + name + "'");
}

double default_eta(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::isotonic:
      return 1.0 / 3.0;
    case EstimatorKind::parametric_probit:
    case EstimatorKind::parametric_logit:
      return 0.5;
    case EstimatorKind::oracle:
      return 1.0;
  }
  return 1.0 / 3.0;
}

CdfEstimate estimate_cdf(EstimatorKind kind, std::span<const UnivariateObservation> observations,
                         const std::function<double(double)>& truth) {
  CdfEstimate out;
  switch (kind) {
    case EstimatorKind::isotonic: {
      auto fit = std::make_shared<const MonotoneFit>(fit_cdf_univariate(observations));
      out.isotonic = *fit;
      out.cdf = [fit](double b) { return fit->evaluate(b); };
      break;
    }
    case EstimatorKind::parametric_probit:
    case EstimatorKind::parametric_logit: {
      std::vector<double> b, p;
      b.reserve(observations.size());
      p.reserve(observations.size());
      for (const auto& o : observations) {
        b.push_back(o.b);
        p.push_back(o.proportion);
      }
      const auto family =
          kind == EstimatorKind::parametric_probit ? ParametricFamily::probit : ParametricFamily::logit;
      const ParametricFit fit = fit_parametric(family, b, p);
      out.parametric = fit;
      out.cdf = [fit](double x) { return predict_parametric_or_step(fit, x); };
      break;
    }
    case EstimatorKind::oracle:
      if (!truth) throw ArgumentError("oracle estimator needs the true CDF");
      out.cdf = truth;
      break;
  }
  return out;
}

}  // namespace revperf
