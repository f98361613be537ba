#pragma once

#include <span>
#include <vector>

#include "revperf/core_model.hpp"
#include "revperf/distributions.hpp"
#include "revperf/rng.hpp"

namespace revperf::coate_loury {

/// Labor market: workers invest in skill (action 1) when their cost is below
/// the wage incentive; the firm hires when the score X exceeds theta.
struct MarketModel {
  double wage = 1.0;
  /// Score laws on [0, 1] given skill action 1 and 0.
  UnivariateDistribution score_skilled = UnivariateDistribution::power(2.0);
  UnivariateDistribution score_unskilled = UnivariateDistribution::uniform(0.0, 1.0);
  UnivariateDistribution cost = UnivariateDistribution::uniform(0.0, 1.0);
  /// Loss for hiring an unskilled worker and gain for hiring a skilled one.
  double delta0 = 1.0;
  double delta1 = 1.0;

  double survival_skilled(double theta) const { return 1.0 - score_skilled.cdf(theta); }
  double survival_unskilled(double theta) const { return 1.0 - score_unskilled.cdf(theta); }

  /// Throws ModelError when an invariant fails on a validation grid.
  void validate(std::size_t grid_points = 1001) const;
};

/// Default market: Beta(2,1) vs Uniform scores, Uniform(0,1) cost.
MarketModel default_market(double wage = 1.0);

double incentive(const MarketModel& market, double theta);
double skilled_proportion(const MarketModel& market, double theta);

/// E[loss | A = a] for the hiring loss 1{X > theta}(-delta1 Y + delta0 (1 - Y)).
double conditional_loss(const MarketModel& market, double theta, int action);

/// Sum over actions of D_a(theta) * E[loss | A = a].
double performative_risk(const MarketModel& market, double theta);

/// The two-action choice probabilities (1 - pi, pi) for a given pi, shared by
/// the true and plug-in risks so identical inputs give identical sums.
double risk_from_proportion(const MarketModel& market, double theta, double proportion);

/// Incentive curve summary on a dense grid: maximum value and its location.
struct IncentiveRange {
  double argmax;
  double max;
};
IncentiveRange incentive_range(const MarketModel& market, std::size_t grid_points = 4097);

/// Smallest theta with incentive(theta) == b, by bisection on [0, argmax].
/// Throws RangeError when b lies outside [0, max incentive].
double threshold_for_incentive(const MarketModel& market, double b);
double threshold_for_incentive(const MarketModel& market, const IncentiveRange& range, double b);

struct MarketSample {
  std::vector<double> score;
  std::vector<int> action;
};
MarketSample simulate_market(const MarketModel& market, double theta, std::size_t n, Rng& rng);

struct Optimum {
  double theta;
  double risk;
};
/// Grid argmin of the performative risk; ties go to the smallest theta.
Optimum true_optimum(const MarketModel& market, std::span<const double> theta_grid);

/// Benefits B_a(theta) = wage * P(X > theta | A = a); their gap is the incentive.
BenefitProfile benefit_profile(const MarketModel& market);

}  // namespace revperf::coate_loury
