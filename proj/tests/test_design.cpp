#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "revperf/design.hpp"
#include "revperf/errors.hpp"
#include "revperf/numerics.hpp"

using namespace revperf;

namespace {
DesignDensity two_bins() { return DesignDensity({0.0, 0.5, 1.0}, {0.5, 1.5}); }

double total_mass(const DesignDensity& d) {
  double m = 0.0;
  for (std::size_t k = 0; k < d.bins(); ++k) m += d.density()[k] * (d.edges()[k + 1] - d.edges()[k]);
  return m;
}
}  // namespace

TEST(DesignDensity, Validation) {
  EXPECT_THROW(DesignDensity({0.0, 1.0}, {0.9}), ArgumentError);
  EXPECT_THROW(DesignDensity({0.0, 0.0, 1.0}, {1.0, 1.0}), ArgumentError);
  EXPECT_THROW(DesignDensity({0.0, 0.5, 1.0}, {2.0, 0.0}), ArgumentError);
  EXPECT_THROW(DesignDensity({0.0, 1.0}, {1.0, 1.0}), ArgumentError);
  EXPECT_NO_THROW(two_bins());
}

TEST(DesignDensity, QuantileExamples) {
  const auto u = DesignDensity::uniform(2.0);
  EXPECT_NEAR(u.quantile(0.37), 0.74, 1e-12);
  const auto d = two_bins();
  EXPECT_DOUBLE_EQ(d.quantile(0.1), 0.2);
  EXPECT_DOUBLE_EQ(d.quantile(0.25), 0.5);
  EXPECT_DOUBLE_EQ(d.quantile(0.0), 0.0);
  EXPECT_DOUBLE_EQ(d.quantile(1.0), 1.0);
  EXPECT_NEAR(d.quantile(0.625), 0.75, 1e-15);
}

TEST(DesignDensity, CdfInvertsQuantile) {
  const auto d = two_bins();
  for (double u : linspace(0.0, 1.0, 101)) EXPECT_NEAR(d.cdf(d.quantile(u)), u, 1e-14);
  EXPECT_EQ(d.pdf(0.25), 0.5);
  EXPECT_EQ(d.pdf(0.75), 1.5);
  EXPECT_EQ(d.pdf(1.5), 0.0);
}

TEST(OptimalDensity, ConstantSigmaGivesUniform) {
  const auto edges = linspace(0.0, 1.0, kGridPoints);
  const std::vector<double> sigma(kGridPoints - 1, 0.3);
  const auto d = optimal_density(edges, sigma);
  for (double v : d.density()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(OptimalDensity, BinomialSigmaPeaksAtFourOverPi) {
  const auto edges = linspace(0.0, 1.0, kGridPoints);
  const auto sigma = sigma_from_cdf([](double b) { return b; }, edges);
  const auto d = optimal_density(edges, sigma);
  EXPECT_NEAR(d.pdf(0.5), 4.0 / std::numbers::pi, 1e-3);
}

TEST(OptimalDensity, FloorOnZeroRegion) {
  const auto edges = linspace(0.0, 1.0, 11);
  std::vector<double> sigma(10, 0.0);
  for (std::size_t k = 5; k < 10; ++k) sigma[k] = 0.5;
  const double floor = 0.1;
  const auto d = optimal_density(edges, sigma, floor);
  // Weights 0.05 on five bins and 0.5 on five bins, each of width 0.1.
  const double mass = 5 * 0.1 * 0.05 + 5 * 0.1 * 0.5;
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(d.density()[k], 0.05 / mass, 1e-12);
  for (std::size_t k = 5; k < 10; ++k) EXPECT_NEAR(d.density()[k], 0.5 / mass, 1e-12);
  EXPECT_NEAR(total_mass(d), 1.0, 1e-12);
}

TEST(OptimalDensity, AllZeroSigmaFallsBackToUniform) {
  const auto edges = linspace(0.0, 2.0, 9);
  const auto d = optimal_density(edges, std::vector<double>(8, 0.0));
  for (double v : d.density()) EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(OptimalDensity, NormalizedAndFloorRespected) {
  Rng rng(71);
  for (int t = 0; t < 100; ++t) {
    const std::size_t bins = 2 + rng.below(600);
    std::vector<double> edges{0.0};
    for (std::size_t k = 0; k < bins; ++k) edges.push_back(edges.back() + rng.uniform(0.001, 0.1));
    std::vector<double> sigma(bins);
    for (auto& s : sigma) s = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0.0, 0.5);
    const double floor = rng.uniform(0.01, 0.5);
    const auto d = optimal_density(edges, sigma, floor);
    EXPECT_NEAR(total_mass(d), 1.0, 1e-9);
    const double hi = *std::max_element(d.density().begin(), d.density().end());
    for (double v : d.density()) EXPECT_GE(v, floor * hi * (1 - 1e-12));
  }
}

TEST(SigmaFromFit, Examples) {
  const auto edges = linspace(0.0, 1.0, 65);
  const MonotoneFit half({{0.0}}, {0.5});
  for (double s : sigma_from_fit(half, edges)) EXPECT_DOUBLE_EQ(s, 0.5);

  const auto mids = bin_midpoints(edges);
  std::vector<std::vector<double>> pts;
  for (double m : mids) pts.push_back({m});
  const MonotoneFit identity(pts, mids);
  const auto s = sigma_from_fit(identity, edges);
  for (std::size_t k = 0; k < mids.size(); ++k) EXPECT_DOUBLE_EQ(s[k], std::sqrt(mids[k] * (1 - mids[k])));

  const MonotoneFit zero({{0.0}}, {0.0});
  for (double v : sigma_from_fit(zero, edges)) EXPECT_EQ(v, 0.0);
  const MonotoneFit two_d({{0.0, 0.0}}, {0.5});
  EXPECT_THROW(sigma_from_fit(two_d, edges), ArgumentError);
}

TEST(SampleDesign, ChiSquareGoodnessOfFit) {
  const auto edges = linspace(0.0, 1.0, 21);
  std::vector<double> sigma(20);
  for (std::size_t k = 0; k < 20; ++k) sigma[k] = 0.05 + 0.1 * std::abs(std::sin(0.7 * k));
  const auto d = optimal_density(edges, sigma, 0.2);
  const boost::math::chi_squared chi(19);
  const double critical = boost::math::quantile(chi, 0.999);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    const std::size_t n = 100000;
    std::vector<double> counts(20, 0.0);
    for (double b : sample_design(d, n, rng)) {
      ASSERT_GE(b, 0.0);
      ASSERT_LE(b, 1.0);
      counts[std::min<std::size_t>(static_cast<std::size_t>(b * 20), 19)] += 1;
    }
    double stat = 0.0;
    for (std::size_t k = 0; k < 20; ++k) {
      const double expected = n * d.density()[k] * 0.05;
      stat += (counts[k] - expected) * (counts[k] - expected) / expected;
    }
    EXPECT_LT(stat, critical) << seed;
  }
}

TEST(SampleDesign, UniformWithinBin) {
  // Split one bin into 10 sub-bins: counts should be flat inside it.
  const auto d = two_bins();
  Rng rng(5);
  std::vector<double> counts(10, 0.0);
  for (double b : sample_design(d, 200000, rng)) {
    if (b >= 0.5) counts[std::min<std::size_t>(static_cast<std::size_t>((b - 0.5) * 20), 9)] += 1;
  }
  const double expected = 200000 * 0.75 / 10;
  const boost::math::chi_squared chi(9);
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  EXPECT_LT(stat, boost::math::quantile(chi, 0.999));
}

TEST(Mise, StepFitOfIdentityIsOneTwelfth) {
  const MonotoneFit step({{0.5}}, {0.5});
  const double ise =
      integrated_squared_error([&](double b) { return step.evaluate(b); }, [](double b) { return b; }, 0.0, 1.0);
  EXPECT_NEAR(ise, 1.0 / 12.0, 2e-3);
  const double fine = integrated_squared_error([&](double b) { return step.evaluate(b); },
                                               [](double b) { return b; }, 0.0, 1.0, 100001);
  EXPECT_NEAR(fine, 1.0 / 12.0, 1e-5);
}

TEST(Mise, SinglePointDesignAtCenter) {
  // A density concentrated on a tiny bin around 0.5 places the point within
  // 1e-9 of the center, so the MISE is the step-function error.
  const double eps = 1e-9;
  const DesignDensity d({0.0, 0.5 - eps, 0.5 + eps, 1.0}, {1e-9, (1.0 - 1e-9 * (1.0 - 2 * eps)) / (2 * eps), 1e-9});
  const double mise = mise_monte_carlo([](double b) { return b; }, d, 0, 1, 5, Rng(1));
  EXPECT_NEAR(mise, 1.0 / 12.0, 2e-3);
}

TEST(Mise, NoiselessBelowNoisy) {
  const auto d = DesignDensity::uniform(1.0);
  const auto truth = [](double b) { return b * b; };
  const Rng rng(9);
  const double noiseless = mise_monte_carlo(truth, d, 0, 64, 50, rng);
  const double noisy = mise_monte_carlo(truth, d, 10, 64, 50, rng);
  EXPECT_LT(noiseless, noisy);
  EXPECT_THROW(mise_monte_carlo(truth, d, 10, 64, 0, rng), ArgumentError);
}

TEST(Mise, MoreReplicationsLessSpread) {
  const auto d = DesignDensity::uniform(1.0);
  const auto truth = [](double b) { return b; };
  auto spread = [&](std::size_t reps) {
    std::vector<double> v;
    for (std::uint64_t seed = 0; seed < 10; ++seed) v.push_back(mise_monte_carlo(truth, d, 20, 32, reps, Rng(seed)));
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
  };
  EXPECT_LT(spread(100), spread(1));
}

TEST(RelativeEfficiency, Examples) {
  EXPECT_EQ(relative_efficiency(0.3, 0.3), 0.0);
  EXPECT_EQ(relative_efficiency(0.2, 0.1), 0.5);
  EXPECT_LT(relative_efficiency(0.1, 0.2), 0.0);
  EXPECT_THROW(relative_efficiency(0.0, 0.1), ArgumentError);
  EXPECT_THROW(relative_efficiency(0.1, -1.0), ArgumentError);
}

TEST(EpisodesForBudget, MatchesLogFormula) {
  EXPECT_EQ(episodes_for_budget(56, 8), 3);
  EXPECT_EQ(episodes_for_budget(4032, 64), 6);
  for (std::size_t tau0 = 1; tau0 < 40; ++tau0) {
    for (std::size_t m = 0; m < 3000; m += 7) {
      int k = 0;
      std::size_t used = 0;
      while (used + (tau0 << k) <= m) used += tau0 << k++;
      EXPECT_EQ(episodes_for_budget(m, tau0), k);
    }
  }
}

TEST(SequentialDesign, ShapeAndFirstEpisodeUniform) {
  SequentialDesignConfig cfg;
  cfg.tau0 = 16;
  cfg.episodes = 3;
  cfg.mise_replications = 10;
  cfg.market.cost = UnivariateDistribution::probit(0.5, 0.2);
  const auto trace = run_sequential_design(cfg, Rng(3));
  ASSERT_EQ(trace.episodes.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(trace.episodes[k].episode, k + 1);
    EXPECT_EQ(trace.episodes[k].length, 16u << k);
    EXPECT_NEAR(trace.episodes[k].rel, 1.0 - trace.episodes[k].mise_dstar / trace.episodes[k].mise, 1e-15);
  }
  const auto& first = trace.episodes[0].density.density();
  for (double v : first) EXPECT_NEAR(v, first[0], 1e-12);
  EXPECT_NEAR(trace.episodes[0].density.upper(), 1.0, 1e-12);
  const auto csv = trace.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "episode,length,mise,mise_dstar,rel");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(SequentialDesign, Deterministic) {
  SequentialDesignConfig cfg;
  cfg.tau0 = 8;
  cfg.episodes = 3;
  cfg.mise_replications = 5;
  EXPECT_EQ(run_sequential_design(cfg, Rng(11)).to_csv(), run_sequential_design(cfg, Rng(11)).to_csv());
  EXPECT_NE(run_sequential_design(cfg, Rng(11)).to_csv(), run_sequential_design(cfg, Rng(12)).to_csv());
}

TEST(SequentialDesign, AdaptsTowardOptimalDesign) {
  SequentialDesignConfig cfg;
  cfg.market.cost = UnivariateDistribution::probit(0.5, 0.1);
  cfg.tau0 = 64;
  cfg.episodes = 4;
  cfg.mise_replications = 40;
  cfg.rel_eval_points = 256;
  const auto trace = run_sequential_design(cfg, Rng(21));
  EXPECT_LT(trace.episodes.back().rel, trace.episodes.front().rel);
}

TEST(SequentialDesign, RejectsBadConfig) {
  SequentialDesignConfig cfg;
  cfg.tau0 = 1;
  EXPECT_THROW(run_sequential_design(cfg, Rng(1)), ArgumentError);
  cfg.tau0 = 8;
  cfg.episodes = 0;
  EXPECT_THROW(run_sequential_design(cfg, Rng(1)), ArgumentError);
}
