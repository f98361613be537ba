#pragma once

// Randomized checks shared by the unit tests and the acceptance binary. Each
// returns the worst discrepancy found so callers can assert on it and print it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "oracles.hpp"
#include "revperf/core_model.hpp"
#include "revperf/monotone_fit.hpp"
#include "revperf/numerics.hpp"
#include "revperf/parametric.hpp"
#include "revperf/rng.hpp"

namespace scenario {

struct PavaReport {
  double worst_excess_over_grid = -1e300;  // obj(PAVA) - grid minimum; must stay <= 1e-6
  double worst_gap_to_exact = 0.0;         // |obj(PAVA) - obj(block enumeration)|
  bool all_monotone = true;
};

/// Random instances of length 1..5 with y on a 0.1 grid and integer weights 1..5.
inline PavaReport pava_against_grid_search(int instances, std::uint64_t seed) {
  revperf::Rng rng(seed);
  PavaReport report;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.below(5);
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<double>(rng.below(11)) / 10.0;
      w[i] = static_cast<double>(1 + rng.below(5));
    }
    const auto f = revperf::weighted_pava(y, w);
    for (std::size_t i = 1; i < n; ++i) report.all_monotone = report.all_monotone && f[i - 1] <= f[i];
    const double obj = oracle::weighted_sse(y, w, f);
    const double grid = oracle::monotone_grid_minimum(
        n, [&](std::size_t i, double v) { return w[i] * (y[i] - v) * (y[i] - v); }, 0.0, 1.0, 0.01);
    const auto exact = oracle::isotonic_by_block_enumeration(y, w);
    report.worst_excess_over_grid = std::max(report.worst_excess_over_grid, obj - grid);
    report.worst_gap_to_exact = std::max(report.worst_gap_to_exact, std::abs(obj - oracle::weighted_sse(y, w, exact)));
  }
  return report;
}

struct MultivariateReport {
  double worst_objective_gap = 0.0;  // |obj(solver) - obj(partition enumeration)|
  double worst_violation = 0.0;      // max over ordered pairs of f_i - f_j
};

/// Random 2D instances with 1..6 points on a 4x4 lattice (so comparabilities
/// and duplicates are common), y uniform on [0, 1], weights in [0.5, 3].
inline MultivariateReport multivariate_against_enumeration(int instances, std::uint64_t seed) {
  revperf::Rng rng(seed);
  MultivariateReport report;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.below(6);
    std::vector<std::vector<double>> x(n);
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = {static_cast<double>(rng.below(4)), static_cast<double>(rng.below(4))};
      y[i] = rng.uniform();
      w[i] = rng.uniform(0.5, 3.0);
    }
    const auto fit = revperf::fit_monotone_multivariate(x, y, w);
    const auto& f = fit.fitted_values();
    const auto exact = oracle::isotonic_by_partition_enumeration(x, y, w);
    report.worst_objective_gap = std::max(
        report.worst_objective_gap, std::abs(oracle::weighted_sse(y, w, f) - oracle::weighted_sse(y, w, exact)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (oracle::dominates(x[i], x[j])) report.worst_violation = std::max(report.worst_violation, f[i] - f[j]);
  }
  return report;
}

inline double binomial_log_likelihood(std::span<const double> p_hat, std::span<const double> n, std::span<const double> f) {
  double ll = 0.0;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    if (p_hat[i] > 0.0) ll += n[i] * p_hat[i] * std::log(f[i]);
    if (p_hat[i] < 1.0) ll += n[i] * (1.0 - p_hat[i]) * std::log(1.0 - f[i]);
  }
  return ll;
}

struct LikelihoodReport {
  double worst_shortfall = -1e300;  // grid maximum - ll(PAVA); must stay <= 1e-6
};

/// Binary instances of length 1..4: proportions k / n_m with n_m in 1..20.
inline LikelihoodReport likelihood_against_grid(int instances, std::uint64_t seed) {
  revperf::Rng rng(seed);
  LikelihoodReport report;
  for (int t = 0; t < instances; ++t) {
    const std::size_t len = 1 + rng.below(4);
    std::vector<double> p(len), n(len);
    for (std::size_t i = 0; i < len; ++i) {
      n[i] = static_cast<double>(1 + rng.below(20));
      p[i] = static_cast<double>(rng.below(static_cast<std::uint64_t>(n[i]) + 1)) / n[i];
    }
    const auto f = revperf::weighted_pava(p, n);
    const double ll = binomial_log_likelihood(p, n, f);
    const double grid_max = -oracle::monotone_grid_minimum(
        len,
        [&](std::size_t i, double v) {
          return -(n[i] * p[i] * std::log(v) + n[i] * (1.0 - p[i]) * std::log(1.0 - v));
        },
        0.01, 0.99, 0.01);
    report.worst_shortfall = std::max(report.worst_shortfall, grid_max - ll);
  }
  return report;
}

/// Sup-norm error of the isotonic CDF fit for F(b) = b on [0, 1] from n total
/// agents: n / 10 equidistant design points with 10 agents each, measured on
/// [delta_n, 1 - delta_n] with delta_n = (log n / n)^(1/3).
inline double truncated_sup_error(std::size_t n, std::uint64_t seed) {
  revperf::Rng rng(seed);
  const std::size_t per_point = 10;
  const std::size_t points = n / per_point;
  std::vector<revperf::UnivariateObservation> obs(points);
  for (std::size_t m = 0; m < points; ++m) {
    const double b = (static_cast<double>(m) + 0.5) / static_cast<double>(points);
    obs[m] = {b, static_cast<double>(rng.binomial(per_point, b)) / per_point, static_cast<double>(per_point)};
  }
  const auto fit = revperf::fit_cdf_univariate(obs);
  const double nd = static_cast<double>(n);
  const double delta = std::cbrt(std::log(nd) / nd);
  // The fit is a right-continuous step function: check each step's value at
  // both ends of its interval inside the window.
  std::vector<double> probes = revperf::linspace(delta, 1.0 - delta, 2049);
  for (const auto& p : fit.design_points()) {
    if (p[0] >= delta && p[0] <= 1.0 - delta) {
      probes.push_back(p[0]);
      probes.push_back(std::nextafter(p[0], 0.0));
    }
  }
  double worst = 0.0;
  for (double b : probes) worst = std::max(worst, std::abs(fit.evaluate(b) - b));
  return worst;
}

struct RateReport {
  std::vector<double> sizes;
  std::vector<double> median_error;
  double slope;
};

inline RateReport isotonic_rate(const std::vector<std::size_t>& sizes, int seeds) {
  RateReport r;
  std::vector<double> log_n, log_e;
  for (std::size_t n : sizes) {
    std::vector<double> errors;
    for (int s = 0; s < seeds; ++s) errors.push_back(truncated_sup_error(n, 1000 + static_cast<std::uint64_t>(s)));
    r.sizes.push_back(static_cast<double>(n));
    r.median_error.push_back(revperf::median(errors));
    log_n.push_back(std::log(static_cast<double>(n)));
    log_e.push_back(std::log(r.median_error.back()));
  }
  r.slope = revperf::ols_slope(log_n, log_e);
  return r;
}

/// sup_b |F_n(b) - g(b)| over [0, b_max] from raw draws (+inf allowed).
inline double kolmogorov_distance(std::vector<double> draws, const std::function<double(double)>& g, double b_max) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < draws.size() && draws[i] <= b_max) {
    std::size_t j = i;
    while (j < draws.size() && draws[j] == draws[i]) ++j;
    const double x = draws[i];
    d = std::max(d, std::abs(static_cast<double>(j) / n - g(x)));
    if (x > 0.0) d = std::max(d, std::abs(static_cast<double>(i) / n - g(std::nextafter(x, -1.0))));
    i = j;
  }
  d = std::max(d, std::abs(static_cast<double>(i) / n - g(b_max)));
  return d;
}

/// Maps on [0, 1] used for the cost round trip: smooth, convex, with an atom
/// at 0, and piecewise linear with a flat start.
inline std::vector<std::function<double(double)>> round_trip_maps() {
  return {[](double b) { return b; }, [](double b) { return b * b; }, [](double b) { return 0.2 + 0.6 * b; },
          [](double b) { return b < 0.5 ? 0.1 : 0.1 + 0.8 * (b - 0.5); }};
}

/// Worst Kolmogorov distance between n draws of the cost built from each map
/// and the map itself, over the given seeds.
inline double cost_round_trip_distance(const std::vector<std::function<double(double)>>& maps,
                                       const std::vector<std::uint64_t>& seeds, std::size_t n) {
  double worst = 0.0;
  for (const auto& g : maps) {
    const auto cost = revperf::cost_from_map_binary(g, 1.0);
    for (std::uint64_t seed : seeds) {
      revperf::Rng rng(seed);
      std::vector<double> draws(n);
      for (double& d : draws) d = cost.sample(rng)[1];
      worst = std::max(worst, kolmogorov_distance(draws, g, 1.0));
    }
  }
  return worst;
}

/// Largest |frequency - exact| / binomial SE over all actions, comparing n
/// sampled agents with exact_choice_probabilities (4e6 Monte Carlo draws when
/// no closed form exists). Uniform binary costs for 2 actions, correlated
/// Gaussian costs otherwise.
inline double choice_consistency_worst_z(int count, std::size_t n) {
  using revperf::CostModel;
  CostModel cost = CostModel::univariate(revperf::UnivariateDistribution::uniform(0.0, 1.0));
  std::vector<double> b{0.0, 0.42};
  if (count > 2) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(count, count, 0.2);
    cov.diagonal().setOnes();
    b.resize(count);
    for (int a = 0; a < count; ++a) b[a] = 0.3 * a - 0.4;
    cost = CostModel::gaussian(Eigen::VectorXd::LinSpaced(count, 0.0, 0.5), cov);
  }
  revperf::Rng exact_rng(100), sample_rng(200);
  const auto p = revperf::exact_choice_probabilities(cost, b, 4000000, exact_rng);
  const auto actions = revperf::sample_actions(cost, b, n, sample_rng);
  double worst = 0.0;
  for (int a = 0; a < count; ++a) {
    const double freq = static_cast<double>(std::count(actions.begin(), actions.end(), a)) / static_cast<double>(n);
    const double se = std::sqrt(p[a] * (1.0 - p[a]) / static_cast<double>(n));
    worst = std::max(worst, se > 0.0 ? std::abs(freq - p[a]) / se : (freq == p[a] ? 0.0 : 1e300));
  }
  return worst;
}

struct ParametricReport {
  double worst_mu_error = 0.0;
  double worst_sigma_error = 0.0;
  bool any_degenerate = false;
};

/// Noiseless proportions p_i = G((b_i - mu) / sigma) for random (mu, sigma)
/// and 2..31 design points; the link G comes from the oracle, not the library.
inline ParametricReport parametric_recovery(revperf::ParametricFamily family, int instances, std::uint64_t seed) {
  revperf::Rng rng(seed);
  ParametricReport report;
  for (int t = 0; t < instances; ++t) {
    const double mu = rng.uniform(-1.0, 2.0);
    const double sigma = rng.uniform(0.2, 3.0);
    const std::size_t m = 2 + rng.below(30);
    std::vector<double> b(m), p(m);
    for (std::size_t i = 0; i < m; ++i) {
      b[i] = mu + sigma * rng.uniform(-3.0, 3.0);
      const double z = (b[i] - mu) / sigma;
      p[i] = family == revperf::ParametricFamily::probit ? oracle::standard_normal_cdf(z) : 1.0 / (1.0 + std::exp(-z));
    }
    const auto fit = revperf::fit_parametric(family, b, p);
    report.any_degenerate = report.any_degenerate || fit.degenerate;
    report.worst_mu_error = std::max(report.worst_mu_error, std::abs(fit.mu - mu));
    report.worst_sigma_error = std::max(report.worst_sigma_error, std::abs(fit.sigma - sigma));
  }
  return report;
}

}  // namespace scenario
