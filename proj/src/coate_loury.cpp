#include "revperf/coate_loury.hpp"

#include <cmath>
#include <string>

#include "revperf/errors.hpp"
#include "revperf/numerics.hpp"

namespace revperf::coate_loury {

namespace {
void check_theta(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw ArgumentError("threshold theta = " + std::to_string(theta) + " outside [0, 1]");
  }
}
}  // namespace

void MarketModel::validate(std::size_t grid_points) const {
  if (!(wage > 0.0)) throw ModelError("market wage must be positive");
  if (!(delta0 > 0.0) || !(delta1 > 0.0)) throw ModelError("market hiring loss/gain must be positive");
  constexpr double tol = 1e-12;
  if (std::abs(survival_skilled(0.0) - 1.0) > tol || std::abs(survival_unskilled(0.0) - 1.0) > tol ||
      std::abs(survival_skilled(1.0)) > tol || std::abs(survival_unskilled(1.0)) > tol) {
    throw ModelError("score laws must be supported on [0, 1]");
  }
  double previous_cost = 0.0;
  for (double t : linspace(0.0, 1.0, grid_points)) {
    if (survival_skilled(t) < survival_unskilled(t) - tol) {
      throw ModelError("skilled scores must dominate unskilled scores (fails at theta = " + std::to_string(t) + ")");
    }
  }
  for (double x : linspace(0.0, wage, grid_points)) {
    const double c = cost.cdf(x);
    if (!(c >= 0.0 && c <= 1.0) || c < previous_cost - tol) throw ModelError("cost CDF must be nondecreasing in [0, 1]");
    previous_cost = c;
  }
}

MarketModel default_market(double wage) {
  MarketModel m;
  m.wage = wage;
  return m;
}

double incentive(const MarketModel& market, double theta) {
  check_theta(theta);
  // Same arithmetic as the benefit gap B_1 - B_0 of benefit_profile().
  return market.wage * market.survival_skilled(theta) - market.wage * market.survival_unskilled(theta);
}

double skilled_proportion(const MarketModel& market, double theta) {
  return market.cost.cdf(incentive(market, theta));
}

double conditional_loss(const MarketModel& market, double theta, int action) {
  check_theta(theta);
  if (action == 1) return -market.delta1 * market.survival_skilled(theta);
  if (action == 0) return market.delta0 * market.survival_unskilled(theta);
  throw ArgumentError("Coate-Loury actions are 0 and 1");
}

double risk_from_proportion(const MarketModel& market, double theta, double proportion) {
  return (1.0 - proportion) * conditional_loss(market, theta, 0) + proportion * conditional_loss(market, theta, 1);
}

double performative_risk(const MarketModel& market, double theta) {
  return risk_from_proportion(market, theta, skilled_proportion(market, theta));
}

IncentiveRange incentive_range(const MarketModel& market, std::size_t grid_points) {
  IncentiveRange best{0.0, incentive(market, 0.0)};
  const auto grid = linspace(0.0, 1.0, grid_points);
  for (double t : grid) {
    const double v = incentive(market, t);
    if (v > best.max) best = {t, v};
  }
  // Golden-section refinement around the grid maximizer (incentive is unimodal).
  const double h = 1.0 / static_cast<double>(grid_points - 1);
  double lo = std::max(0.0, best.argmax - h);
  double hi = std::min(1.0, best.argmax + h);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double a = hi - r * (hi - lo);
    const double b = lo + r * (hi - lo);
    if (incentive(market, a) >= incentive(market, b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  const double t = 0.5 * (lo + hi);
  const double v = incentive(market, t);
  if (v > best.max) best = {t, v};
  return best;
}

double threshold_for_incentive(const MarketModel& market, const IncentiveRange& range, double b) {
  if (!(b >= 0.0)) throw RangeError("incentive value must be nonnegative");
  if (b > range.max + 1e-12) {
    throw RangeError("incentive value " + std::to_string(b) + " exceeds the curve maximum " + std::to_string(range.max));
  }
  if (b >= range.max) return range.argmax;
  // Incentive is nondecreasing on [0, argmax]; keep incentive(lo) < b <= incentive(hi).
  double lo = 0.0;
  double hi = range.argmax;
  if (incentive(market, lo) >= b) return lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (incentive(market, mid) < b) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15) break;
  }
  return hi;
}

double threshold_for_incentive(const MarketModel& market, double b) {
  return threshold_for_incentive(market, incentive_range(market), b);
}

MarketSample simulate_market(const MarketModel& market, double theta, std::size_t n, Rng& rng) {
  if (n == 0) throw ArgumentError("simulate_market: n must be >= 1");
  const double p = skilled_proportion(market, theta);
  MarketSample out;
  out.score.resize(n);
  out.action.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int a = rng.uniform() < p ? 1 : 0;
    const auto& law = a == 1 ? market.score_skilled : market.score_unskilled;
    out.action[i] = a;
    out.score[i] = law.quantile(rng.uniform());
  }
  return out;
}

Optimum true_optimum(const MarketModel& market, std::span<const double> theta_grid) {
  if (theta_grid.empty()) throw ArgumentError("true_optimum: empty theta grid");
  Optimum best{theta_grid[0], performative_risk(market, theta_grid[0])};
  for (std::size_t i = 1; i < theta_grid.size(); ++i) {
    const double r = performative_risk(market, theta_grid[i]);
    if (r < best.risk) best = {theta_grid[i], r};
  }
  return best;
}

BenefitProfile benefit_profile(const MarketModel& market) {
  BenefitProfile profile{ActionSpace(2), {}, {}};
  profile.eval = [market](std::span<const double> theta) {
    if (theta.size() != 1) throw ArgumentError("Coate-Loury models are scalar thresholds");
    check_theta(theta[0]);
    return std::vector<double>{market.wage * market.survival_unskilled(theta[0]),
                               market.wage * market.survival_skilled(theta[0])};
  };
  profile.inverse = [market](double gap) { return std::vector<double>{threshold_for_incentive(market, gap)}; };
  return profile;
}

}  // namespace revperf::coate_loury
