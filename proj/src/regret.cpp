#include "revperf/regret.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "revperf/errors.hpp"
#include "revperf/numerics.hpp"

namespace revperf {

std::size_t EpisodeSchedule::deployments() const {
  std::size_t total = 0;
  for (const auto& e : episodes) total += e.length;
  return total;
}

namespace {

// ceil(x), treating values within rounding of an integer as that integer
// (pow(16, 0.75) must give exactly 8).
std::size_t robust_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

}  // namespace

EpisodeSchedule episode_schedule(std::size_t budget, std::size_t tau0, double alpha) {
  if (tau0 < 2) throw ArgumentError("episode_schedule: tau0 must be >= 2");
  if (budget < tau0) {
    throw ArgumentError("episode_schedule: budget M = " + std::to_string(budget) + " is below tau0 = " +
                        std::to_string(tau0));
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("episode_schedule: alpha must lie in (0, 1]");
  EpisodeSchedule schedule{budget, tau0, alpha, {}};
  const int count = episodes_for_budget(budget, tau0);
  std::size_t start = 0;
  for (int k = 1; k <= count; ++k) {
    const std::size_t length = tau0 << (k - 1);
    const std::size_t explore =
        std::clamp<std::size_t>(robust_ceil(std::pow(static_cast<double>(length), alpha)), 1, length);
    schedule.episodes.push_back({k, start, length, explore, length - explore});
    start += length;
  }
  return schedule;
}

double default_alpha(EstimatorKind kind) { return 1.0 / (1.0 + default_eta(kind)); }

EstimatedRisk estimated_pr(const DistributionMapEstimate& map,
                           std::span<const std::function<double(double)>> loss_expectations,
                           std::span<const double> theta_grid) {
  if (theta_grid.empty()) throw ArgumentError("estimated_pr: empty theta grid");
  if (loss_expectations.size() != static_cast<std::size_t>(map.actions().count())) {
    throw ArgumentError("estimated_pr: need one conditional loss per action");
  }
  EstimatedRisk out{0, theta_grid[0], std::vector<double>(theta_grid.size())};
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    const double theta = theta_grid[i];
    const auto d = map.evaluate(std::span<const double>(&theta, 1));
    double risk = 0.0;
    for (std::size_t a = 0; a < d.size(); ++a) risk += d[a] * loss_expectations[a](theta);
    out.risk[i] = risk;
    if (risk < out.risk[out.index]) {
      out.index = i;
      out.theta = theta;
    }
  }
  return out;
}

std::vector<double> default_theta_grid(std::size_t points) { return linspace(0.0, 1.0, points); }

double RegretTrace::exploitation_regret() const {
  double total = 0.0;
  for (const auto& d : deployments) {
    if (d.phase == Phase::exploit) total += d.risk - optimal_risk;
  }
  return total;
}

std::string RegretTrace::to_csv() const {
  std::ostringstream os;
  os << "m,episode,phase,b,theta,pr,regret_cum\n";
  for (const auto& d : deployments) {
    os << d.m << ',' << d.episode << ',' << (d.phase == Phase::explore ? "explore" : "exploit") << ','
       << format_double(d.b) << ',' << format_double(d.theta) << ',' << format_double(d.risk) << ','
       << format_double(d.regret_cum) << '\n';
  }
  return os.str();
}

namespace {

// Grid point nearest to theta (ties to the smaller one); grid sorted ascending.
std::size_t nearest_grid_index(std::span<const double> grid, double theta) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), theta);
  if (it == grid.begin()) return 0;
  if (it == grid.end()) return grid.size() - 1;
  const auto hi = static_cast<std::size_t>(it - grid.begin());
  const auto lo = hi - 1;
  return theta - grid[lo] <= grid[hi] - theta ? lo : hi;
}

}  // namespace

RegretTrace run_regret_experiment(const RegretConfig& config, const Rng& rng) {
  namespace cl = coate_loury;
  const auto& market = config.market;
  const auto& grid = config.theta_grid;
  if (grid.empty()) throw ArgumentError("run_regret_experiment: empty theta grid");
  if (!std::is_sorted(grid.begin(), grid.end())) throw ArgumentError("run_regret_experiment: theta grid must be sorted");
  if (config.per_point_n < 1) throw ArgumentError("run_regret_experiment: per_point_n must be >= 1");
  const double alpha = config.alpha.value_or(default_alpha(config.estimator));
  const auto schedule = episode_schedule(config.budget, config.tau0, alpha);

  const auto range = cl::incentive_range(market);
  const auto edges = linspace(0.0, range.max, config.grid_points);
  const std::function<double(double)> truth = market.cost.cdf;
  const cl::Optimum optimum = cl::true_optimum(market, grid);

  const std::vector<std::function<double(double)>> losses = {
      [&market](double t) { return cl::conditional_loss(market, t, 0); },
      [&market](double t) { return cl::conditional_loss(market, t, 1); }};
  double loss_bound = 0.0;
  for (double t : grid) {
    for (const auto& l : losses) loss_bound = std::max(loss_bound, std::abs(l(t)));
  }
  const BenefitProfile profile = cl::benefit_profile(market);

  RegretTrace trace{optimum.theta, optimum.risk, {}, {}};
  trace.deployments.reserve(schedule.deployments());
  double cumulative = 0.0;
  auto deploy = [&](int episode, Phase phase, double b, double theta) {
    const double risk = cl::performative_risk(market, theta);
    cumulative += risk - optimum.risk;
    trace.deployments.push_back({trace.deployments.size() + 1, episode, phase, b, theta, risk, cumulative});
  };

  DesignDensity density = DesignDensity::uniform(range.max, config.grid_points);
  for (const auto& plan : schedule.episodes) {
    Rng data_rng = rng.stream(static_cast<std::uint64_t>(plan.episode));

    std::vector<UnivariateObservation> observations;
    observations.reserve(plan.explore);
    for (std::size_t i = 0; i < plan.explore; ++i) {
      double target = density.quantile(data_rng.uniform());
      while (target > range.max) target = density.quantile(data_rng.uniform());
      const double theta = grid[nearest_grid_index(grid, cl::threshold_for_incentive(market, range, target))];
      const double b = cl::incentive(market, theta);
      const auto sample = cl::simulate_market(market, theta, config.per_point_n, data_rng);
      std::size_t skilled = 0;
      for (int a : sample.action) skilled += static_cast<std::size_t>(a);
      observations.push_back(
          {b, static_cast<double>(skilled) / static_cast<double>(config.per_point_n), static_cast<double>(config.per_point_n)});
      deploy(plan.episode, Phase::explore, b, theta);
    }

    const CdfEstimate estimate = estimate_cdf(config.estimator, observations, truth);
    const DistributionMapEstimate map(
        std::vector<DistributionMapEstimate::ActionCdf>{
            [cdf = estimate.cdf](std::span<const double> gap) { return cdf(gap[0]); }},
        {contrast_matrix(1, 2)}, profile);
    const EstimatedRisk plug_in = estimated_pr(map, losses, grid);

    const double theta_hat = plug_in.theta;
    const double p = cl::skilled_proportion(market, theta_hat);
    const auto d_hat = map.evaluate(std::span<const double>(&theta_hat, 1));
    const double map_error = std::abs((1.0 - p) - d_hat[0]) + std::abs(p - d_hat[1]);
    trace.diagnostics.push_back({plan.episode, theta_hat,
                                 std::abs(cl::performative_risk(market, theta_hat) - plug_in.risk[plug_in.index]),
                                 map_error * loss_bound});

    density = optimal_density(edges, sigma_from_cdf(estimate.cdf, edges), config.density_floor);
    const double b_hat = cl::incentive(market, theta_hat);
    for (std::size_t i = 0; i < plan.exploit; ++i) deploy(plan.episode, Phase::exploit, b_hat, theta_hat);
  }
  return trace;
}

std::optional<double> fit_growth_exponent(std::span<const double> cumulative_regret, double tail_fraction) {
  if (cumulative_regret.size() < 16) throw ArgumentError("fit_growth_exponent: need at least 16 deployments");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw ArgumentError("fit_growth_exponent: tail fraction must lie in (0, 1]");
  const std::size_t n = cumulative_regret.size();
  const auto first = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - tail_fraction)));
  std::vector<double> x, y;
  for (std::size_t i = first; i < n; ++i) {
    if (cumulative_regret[i] > 0.0) {
      x.push_back(std::log(static_cast<double>(i + 1)));
      y.push_back(std::log(cumulative_regret[i]));
    }
  }
  if (x.size() < 2) return std::nullopt;
  return ols_slope(x, y);
}

std::optional<double> fit_growth_exponent(const RegretTrace& trace, double tail_fraction) {
  std::vector<double> regret;
  regret.reserve(trace.deployments.size());
  for (const auto& d : trace.deployments) regret.push_back(d.regret_cum);
  return fit_growth_exponent(regret, tail_fraction);
}

}  // namespace revperf
