#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "revperf/coate_loury.hpp"
#include "revperf/estimator.hpp"
#include "revperf/monotone_fit.hpp"
#include "revperf/rng.hpp"

namespace revperf {

/// Grid resolution for every integral and density over [0, b_max].
inline constexpr std::size_t kGridPoints = 512;
/// Minimum density relative to max sigma.
inline constexpr double kDensityFloor = 0.1;

/// Piecewise-constant sampling density over [edges.front(), edges.back()].
class DesignDensity {
 public:
  /// Throws ArgumentError unless edges increase strictly, densities are
  /// positive and the density integrates to 1 within 1e-9.
  DesignDensity(std::vector<double> edges, std::vector<double> density);

  static DesignDensity uniform(double b_max, std::size_t grid_points = kGridPoints);

  const std::vector<double>& edges() const noexcept { return edges_; }
  const std::vector<double>& density() const noexcept { return density_; }
  std::size_t bins() const noexcept { return density_.size(); }
  double lower() const noexcept { return edges_.front(); }
  double upper() const noexcept { return edges_.back(); }

  double pdf(double b) const;
  double cdf(double b) const;
  /// Inverse CDF; exact within each bin.
  double quantile(double u) const;

 private:
  std::vector<double> edges_;
  std::vector<double> density_;
  std::vector<double> cumulative_;  // mass up to each edge
};

/// Midpoints of consecutive grid edges.
std::vector<double> bin_midpoints(std::span<const double> edges);

/// Density proportional to max(sigma, floor * max sigma) per bin, normalized.
/// All-zero sigma yields the uniform density.
DesignDensity optimal_density(std::span<const double> edges, std::span<const double> sigma,
                              double floor = kDensityFloor);

/// sqrt(F(b)(1 - F(b))) at the bin midpoints of `edges`.
std::vector<double> sigma_from_cdf(const std::function<double(double)>& cdf, std::span<const double> edges);
std::vector<double> sigma_from_fit(const MonotoneFit& fit, std::span<const double> edges);

std::vector<double> sample_design(const DesignDensity& density, std::size_t n, Rng& rng);

/// Trapezoid approximation of the integral of (estimate - truth)^2 over [lo, hi].
double integrated_squared_error(const std::function<double(double)>& estimate,
                                const std::function<double(double)>& truth, double lo, double hi,
                                std::size_t grid_points = kGridPoints);

/// Monte Carlo MISE of the isotonic CDF fit under `density`. Each replication
/// draws `points_per_rep` design points, observes Binomial(per_point_n, F(b)) /
/// per_point_n (noiseless F(b) when per_point_n == 0), fits, and integrates the
/// squared error. Replication r uses rng.stream(r).
double mise_monte_carlo(const std::function<double(double)>& truth, const DesignDensity& density,
                        std::size_t per_point_n, std::size_t points_per_rep, std::size_t replications,
                        const Rng& rng);

/// 1 - mise_dstar / mise_d. Throws ArgumentError on nonpositive input.
double relative_efficiency(double mise_d, double mise_dstar);

/// floor(log2(1 + budget / tau0)).
int episodes_for_budget(std::size_t budget, std::size_t tau0);

struct SequentialDesignConfig {
  coate_loury::MarketModel market = coate_loury::default_market(4.0);
  std::size_t tau0 = 64;
  int episodes = 6;
  std::size_t per_point_n = 50;
  std::size_t mise_replications = 200;
  /// Design size at which every episode's MISE/REL is evaluated; 0 means the
  /// final episode length tau0 * 2^(K-1).
  std::size_t rel_eval_points = 0;
  /// Refit on all episodes so far instead of the current one only.
  bool pool_episodes = false;
  EstimatorKind estimator = EstimatorKind::isotonic;
  double density_floor = kDensityFloor;
  std::size_t grid_points = kGridPoints;
};

struct EpisodeRecord {
  int episode;
  std::size_t length;
  DesignDensity density;
  CdfEstimate fit;
  double mise;
  double mise_dstar;
  double rel;
};

struct EpisodeTrace {
  std::vector<EpisodeRecord> episodes;

  /// Columns: episode,length,mise,mise_dstar,rel
  std::string to_csv() const;
};

EpisodeTrace run_sequential_design(const SequentialDesignConfig& config, const Rng& rng);

}  // namespace revperf
