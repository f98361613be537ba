#include "revperf/design.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "revperf/errors.hpp"
#include "revperf/numerics.hpp"

namespace revperf {

DesignDensity::DesignDensity(std::vector<double> edges, std::vector<double> density)
    : edges_(std::move(edges)), density_(std::move(density)) {
  if (edges_.size() < 2 || density_.size() + 1 != edges_.size()) {
    throw ArgumentError("DesignDensity: need bins + 1 edges");
  }
  cumulative_.assign(edges_.size(), 0.0);
  for (std::size_t k = 0; k < density_.size(); ++k) {
    if (!(edges_[k + 1] > edges_[k])) throw ArgumentError("DesignDensity: edges must increase strictly");
    if (!(density_[k] > 0.0) || !std::isfinite(density_[k])) throw ArgumentError("DesignDensity: densities must be positive");
    cumulative_[k + 1] = cumulative_[k] + density_[k] * (edges_[k + 1] - edges_[k]);
  }
  if (std::abs(cumulative_.back() - 1.0) > 1e-9) {
    throw ArgumentError("DesignDensity: total mass " + std::to_string(cumulative_.back()) + " != 1");
  }
}

DesignDensity DesignDensity::uniform(double b_max, std::size_t grid_points) {
  if (!(b_max > 0.0)) throw ArgumentError("DesignDensity::uniform: b_max must be positive");
  if (grid_points < 2) throw ArgumentError("DesignDensity::uniform: need >= 2 grid points");
  return DesignDensity(linspace(0.0, b_max, grid_points), std::vector<double>(grid_points - 1, 1.0 / b_max));
}

double DesignDensity::pdf(double b) const {
  if (b < edges_.front() || b > edges_.back()) return 0.0;
  auto it = std::upper_bound(edges_.begin(), edges_.end(), b);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - edges_.begin()) - 1, density_.size() - 1);
  return density_[k];
}

double DesignDensity::cdf(double b) const {
  if (b <= edges_.front()) return 0.0;
  if (b >= edges_.back()) return 1.0;
  auto it = std::upper_bound(edges_.begin(), edges_.end(), b);
  const auto k = static_cast<std::size_t>(it - edges_.begin()) - 1;
  return cumulative_[k] + density_[k] * (b - edges_[k]);
}

double DesignDensity::quantile(double u) const {
  if (u <= 0.0) return edges_.front();
  if (u >= 1.0) return edges_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()) - 1, density_.size() - 1);
  const double b = edges_[k] + (u - cumulative_[k]) / density_[k];
  return std::clamp(b, edges_[k], edges_[k + 1]);
}

std::vector<double> bin_midpoints(std::span<const double> edges) {
  std::vector<double> mids;
  if (edges.size() < 2) return mids;
  mids.reserve(edges.size() - 1);
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) mids.push_back(0.5 * (edges[k] + edges[k + 1]));
  return mids;
}

DesignDensity optimal_density(std::span<const double> edges, std::span<const double> sigma, double floor) {
  if (edges.size() < 2 || sigma.size() + 1 != edges.size()) {
    throw ArgumentError("optimal_density: need one sigma value per bin");
  }
  if (!(floor > 0.0 && floor <= 1.0)) throw ArgumentError("optimal_density: floor must lie in (0, 1]");
  double largest = 0.0;
  for (double s : sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ArgumentError("optimal_density: sigma must be finite and >= 0");
    largest = std::max(largest, s);
  }
  std::vector<double> weight(sigma.size());
  for (std::size_t k = 0; k < sigma.size(); ++k) weight[k] = largest > 0.0 ? std::max(sigma[k], floor * largest) : 1.0;
  double mass = 0.0;
  for (std::size_t k = 0; k < weight.size(); ++k) mass += weight[k] * (edges[k + 1] - edges[k]);
  for (auto& w : weight) w /= mass;
  return DesignDensity(std::vector<double>(edges.begin(), edges.end()), std::move(weight));
}

std::vector<double> sigma_from_cdf(const std::function<double(double)>& cdf, std::span<const double> edges) {
  auto mids = bin_midpoints(edges);
  for (auto& m : mids) {
    const double f = std::clamp(cdf(m), 0.0, 1.0);
    m = std::sqrt(f * (1.0 - f));
  }
  return mids;
}

std::vector<double> sigma_from_fit(const MonotoneFit& fit, std::span<const double> edges) {
  if (fit.dimension() != 1) throw ArgumentError("sigma_from_fit: univariate fit required");
  return sigma_from_cdf([&fit](double b) { return fit.evaluate(b); }, edges);
}

std::vector<double> sample_design(const DesignDensity& density, std::size_t n, Rng& rng) {
  if (n == 0) throw ArgumentError("sample_design: n must be >= 1");
  std::vector<double> out(n);
  for (auto& b : out) b = density.quantile(rng.uniform());
  return out;
}

double integrated_squared_error(const std::function<double(double)>& estimate, const std::function<double(double)>& truth,
                                double lo, double hi, std::size_t grid_points) {
  const auto grid = linspace(lo, hi, grid_points);
  std::vector<double> err(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double e = estimate(grid[i]) - truth(grid[i]);
    err[i] = e * e;
  }
  return trapezoid(grid, err);
}

double mise_monte_carlo(const std::function<double(double)>& truth, const DesignDensity& density,
                        std::size_t per_point_n, std::size_t points_per_rep, std::size_t replications,
                        const Rng& rng) {
  if (replications == 0) throw ArgumentError("mise_monte_carlo: replications must be >= 1");
  if (points_per_rep == 0) throw ArgumentError("mise_monte_carlo: points_per_rep must be >= 1");
  std::vector<UnivariateObservation> obs(points_per_rep);
  double total = 0.0;
  for (std::size_t r = 0; r < replications; ++r) {
    Rng stream = rng.stream(r);
    for (auto& o : obs) {
      o.b = density.quantile(stream.uniform());
      const double p = std::clamp(truth(o.b), 0.0, 1.0);
      if (per_point_n == 0) {
        o.proportion = p;
        o.weight = 1.0;
      } else {
        o.proportion = static_cast<double>(stream.binomial(per_point_n, p)) / static_cast<double>(per_point_n);
        o.weight = static_cast<double>(per_point_n);
      }
    }
    const MonotoneFit fit = fit_cdf_univariate(obs);
    total += integrated_squared_error([&fit](double b) { return fit.evaluate(b); }, truth, density.lower(),
                                      density.upper());
  }
  return total / static_cast<double>(replications);
}

double relative_efficiency(double mise_d, double mise_dstar) {
  if (!(mise_d > 0.0) || !(mise_dstar > 0.0)) throw ArgumentError("relative_efficiency: MISE values must be positive");
  return 1.0 - mise_dstar / mise_d;
}

int episodes_for_budget(std::size_t budget, std::size_t tau0) {
  if (tau0 == 0) throw ArgumentError("episodes_for_budget: tau0 must be positive");
  int k = 0;
  // Largest K with tau0 * (2^K - 1) <= budget, i.e. floor(log2(1 + budget / tau0)).
  while (tau0 * ((std::size_t{1} << (k + 1)) - 1) <= budget) ++k;
  return k;
}

std::string EpisodeTrace::to_csv() const {
  std::ostringstream os;
  os << "episode,length,mise,mise_dstar,rel\n";
  for (const auto& e : episodes) {
    os << e.episode << ',' << e.length << ',' << format_double(e.mise) << ',' << format_double(e.mise_dstar) << ','
       << format_double(e.rel) << '\n';
  }
  return os.str();
}

EpisodeTrace run_sequential_design(const SequentialDesignConfig& config, const Rng& rng) {
  if (config.tau0 < 2) throw ArgumentError("run_sequential_design: tau0 must be >= 2");
  if (config.episodes < 1) throw ArgumentError("run_sequential_design: need at least one episode");
  if (config.per_point_n < 1) throw ArgumentError("run_sequential_design: per_point_n must be >= 1");
  const auto& market = config.market;
  const auto range = coate_loury::incentive_range(market);
  const auto edges = linspace(0.0, range.max, config.grid_points);
  const std::function<double(double)> truth = market.cost.cdf;
  const DesignDensity dstar = optimal_density(edges, sigma_from_cdf(truth, edges), config.density_floor);
  const std::size_t eval_points =
      config.rel_eval_points > 0 ? config.rel_eval_points : config.tau0 << (config.episodes - 1);

  EpisodeTrace trace;
  DesignDensity density = DesignDensity::uniform(range.max, config.grid_points);
  std::vector<UnivariateObservation> pooled;
  for (int k = 1; k <= config.episodes; ++k) {
    const std::size_t length = config.tau0 << (k - 1);
    const Rng episode_rng = rng.stream(static_cast<std::uint64_t>(k));
    Rng data_rng = episode_rng.stream(0);

    std::vector<UnivariateObservation> current;
    current.reserve(length);
    for (double b : sample_design(density, length, data_rng)) {
      const double theta = coate_loury::threshold_for_incentive(market, range, b);
      const auto sample = coate_loury::simulate_market(market, theta, config.per_point_n, data_rng);
      std::size_t skilled = 0;
      for (int a : sample.action) skilled += static_cast<std::size_t>(a);
      current.push_back({b, static_cast<double>(skilled) / static_cast<double>(config.per_point_n),
                         static_cast<double>(config.per_point_n)});
    }
    pooled.insert(pooled.end(), current.begin(), current.end());
    CdfEstimate fit = estimate_cdf(config.estimator, config.pool_episodes ? pooled : current, truth);

    // Both MISE estimates share one stream (common random numbers).
    const Rng mise_rng = episode_rng.stream(1);
    const double mise_d =
        mise_monte_carlo(truth, density, config.per_point_n, eval_points, config.mise_replications, mise_rng);
    const double mise_dstar =
        mise_monte_carlo(truth, dstar, config.per_point_n, eval_points, config.mise_replications, mise_rng);
    DesignDensity next = optimal_density(edges, sigma_from_cdf(fit.cdf, edges), config.density_floor);
    trace.episodes.push_back(
        {k, length, density, std::move(fit), mise_d, mise_dstar, relative_efficiency(mise_d, mise_dstar)});
    density = std::move(next);
  }
  return trace;
}

}  // namespace revperf
