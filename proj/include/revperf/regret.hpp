#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "revperf/coate_loury.hpp"
#include "revperf/design.hpp"
#include "revperf/estimator.hpp"
#include "revperf/monotone_fit.hpp"
#include "revperf/rng.hpp"

namespace revperf {

struct EpisodePlan {
  int episode;          // 1-based
  std::size_t start;    // 0-based index of the first deployment
  std::size_t length;   // |J_k| = tau0 * 2^(k-1)
  std::size_t explore;  // |I_k| = min(|J_k|, ceil(|J_k|^alpha))
  std::size_t exploit;  // |J_k| - |I_k|
};

struct EpisodeSchedule {
  std::size_t budget;
  std::size_t tau0;
  double alpha;
  std::vector<EpisodePlan> episodes;

  std::size_t deployments() const;
};

/// Doubling schedule with K = floor(log2(1 + M / tau0)) episodes.
/// Throws ArgumentError when M < tau0, tau0 < 2 or alpha outside (0, 1].
EpisodeSchedule episode_schedule(std::size_t budget, std::size_t tau0, double alpha);

/// alpha = 1 / (1 + eta).
double default_alpha(EstimatorKind kind);

struct EstimatedRisk {
  std::size_t index;
  double theta;
  std::vector<double> risk;  // one value per grid point
};

/// PR_hat(theta) = sum_a D_hat_a(theta) * E[loss | A = a](theta) and its grid
/// argmin (ties to the smallest theta).
EstimatedRisk estimated_pr(const DistributionMapEstimate& map,
                           std::span<const std::function<double(double)>> loss_expectations,
                           std::span<const double> theta_grid);

/// 256 equispaced thresholds on [0, 1].
std::vector<double> default_theta_grid(std::size_t points = 256);

struct RegretConfig {
  coate_loury::MarketModel market = coate_loury::default_market(4.0);
  std::size_t budget = 8192;
  std::size_t tau0 = 8;
  /// Unset: 1 / (1 + eta) for the estimator.
  std::optional<double> alpha;
  std::size_t per_point_n = 50;
  std::vector<double> theta_grid = default_theta_grid();
  EstimatorKind estimator = EstimatorKind::isotonic;
  double density_floor = kDensityFloor;
  std::size_t grid_points = kGridPoints;
};

enum class Phase { explore, exploit };

struct Deployment {
  std::size_t m;  // 1-based
  int episode;
  Phase phase;
  double b;
  double theta;
  double risk;
  double regret_cum;
};

/// Per-episode plug-in diagnostics at the exploited model theta_hat.
struct EpisodeDiagnostics {
  int episode;
  double theta_hat;
  double risk_gap;    // |PR(theta_hat) - PR_hat(theta_hat)|
  double risk_bound;  // sum_a |D_a - D_hat_a|(theta_hat) * max_a sup |E[loss | A = a]|
};

struct RegretTrace {
  double optimal_theta;
  double optimal_risk;
  std::vector<Deployment> deployments;
  std::vector<EpisodeDiagnostics> diagnostics;

  double exploitation_regret() const;
  /// Columns: m,episode,phase,b,theta,pr,regret_cum
  std::string to_csv() const;
};

/// Explore/exploit loop against the Coate-Loury market. Exploration draws
/// b ~ d_hat^(k) and deploys the grid threshold nearest to the smaller
/// incentive root; exploitation deploys the plug-in risk minimizer.
RegretTrace run_regret_experiment(const RegretConfig& config, const Rng& rng);

/// Least-squares slope of log(cumulative regret) on log(m) over the last
/// `tail_fraction` of deployments with positive regret; nullopt when regret
/// is identically zero there.
std::optional<double> fit_growth_exponent(std::span<const double> cumulative_regret, double tail_fraction);
std::optional<double> fit_growth_exponent(const RegretTrace& trace, double tail_fraction);

}  // namespace revperf
