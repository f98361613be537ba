#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "revperf/core_model.hpp"

namespace revperf {

/// Unique minimizer of sum_i w_i (y_i - f_i)^2 over nondecreasing f.
/// Inputs are ordered by ascending design point.
std::vector<double> weighted_pava(std::span<const double> y, std::span<const double> w);

/// True iff a <= b coordinate-wise.
bool precedes(std::span<const double> a, std::span<const double> b);

/// Fitted values of a coordinate-wise monotone function at design points,
/// extended to R^d by the lower envelope max{f_i : x_i <= x} (0 when no
/// design point precedes x). Immutable once built.
class MonotoneFit {
 public:
  MonotoneFit(std::vector<std::vector<double>> design_points, std::vector<double> fitted_values,
              std::vector<double> weights = {});

  int dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<std::vector<double>>& design_points() const noexcept { return points_; }
  const std::vector<double>& fitted_values() const noexcept { return values_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  double evaluate(std::span<const double> x) const;
  double evaluate(double x) const;

  nlohmann::json to_json() const;
  static MonotoneFit from_json(const nlohmann::json& j);

 private:
  int dimension_;
  std::vector<std::vector<double>> points_;
  std::vector<double> values_;
  std::vector<double> weights_;
  // d = 1 with points ascending: evaluation by binary search.
  bool sorted_scalar_ = false;
  std::vector<double> scalar_points_;
};

inline double evaluate_fit(const MonotoneFit& fit, std::span<const double> x) { return fit.evaluate(x); }

struct UnivariateObservation {
  double b;
  double proportion;
  double weight;  // n_m
};

/// Sorts by b, pools identical b values, then runs weighted PAVA with weights n_m.
MonotoneFit fit_cdf_univariate(std::span<const UnivariateObservation> observations);

struct MultivariateOptions {
  double tolerance = 1e-8;
  std::size_t max_sweeps = 100000;
  /// Route d = 1 problems through PAVA (exact). Disable to exercise the
  /// projection solver on chains.
  bool exact_for_scalar = true;
};

struct SolverDiagnostics {
  std::size_t unique_points = 0;
  std::size_t order_pairs = 0;
  std::size_t sweeps = 0;
  double last_change = 0.0;
};

/// Weighted least squares over f_i <= f_j whenever x_i <= x_j coordinate-wise,
/// and 0 <= f <= 1. Cyclic (Dykstra/Hildreth) projection over the transitive
/// reduction of the dominance order. Throws NumericalError when the sweep
/// budget runs out.
MonotoneFit fit_monotone_multivariate(std::vector<std::vector<double>> points, std::span<const double> y,
                                      std::span<const double> w, const MultivariateOptions& options = {},
                                      SolverDiagnostics* diagnostics = nullptr);

/// Pairs (i, j) of the transitive reduction of the strict dominance order
/// over distinct points.
std::vector<std::pair<std::size_t, std::size_t>> dominance_reduction(
    const std::vector<std::vector<double>>& points);

/// Maps raw per-action estimates for actions 1..K-1 to a probability vector:
/// D_0 = 1 - s when s <= 1, otherwise D_a / s and D_0 = 0.
std::vector<double> assemble_probabilities(std::span<const double> nonzero_actions);

/// Estimated distribution map theta -> D(theta), with one CDF estimate per
/// nonzero action evaluated at L_a B(theta).
class DistributionMapEstimate {
 public:
  using ActionCdf = std::function<double(std::span<const double>)>;

  /// One monotone fit per nonzero action, dimensions count - 1.
  DistributionMapEstimate(std::vector<MonotoneFit> fits, std::vector<ContrastMatrix> contrasts,
                          BenefitProfile benefits);
  /// Arbitrary per-action CDF estimates (parametric fits, oracles).
  DistributionMapEstimate(std::vector<ActionCdf> cdfs, std::vector<ContrastMatrix> contrasts,
                          BenefitProfile benefits);

  const ActionSpace& actions() const noexcept { return benefits_.actions; }
  const std::vector<ContrastMatrix>& contrasts() const noexcept { return contrasts_; }
  const std::vector<MonotoneFit>& fits() const noexcept { return fits_; }

  std::vector<double> evaluate(std::span<const double> theta) const;
  std::vector<double> evaluate_benefits(std::span<const double> benefits) const;

 private:
  void check(std::size_t given) const;

  std::vector<MonotoneFit> fits_;
  std::vector<ActionCdf> cdfs_;
  std::vector<ContrastMatrix> contrasts_;
  BenefitProfile benefits_;
};

DistributionMapEstimate assemble_distribution_map(std::vector<MonotoneFit> fits,
                                                  std::vector<ContrastMatrix> contrasts,
                                                  BenefitProfile benefits);

}  // namespace revperf
