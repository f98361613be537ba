#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "revperf/coate_loury.hpp"
#include "revperf/estimator.hpp"
#include "revperf/rng.hpp"

namespace revperf::harness {

inline constexpr const char* kVersion = "1.0.0";

enum class ExperimentKind { fit_univariate, fit_multivariate, design_run, regret_run, map_convergence };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Cost law of the market: uniform {lo, hi}, power {k}, probit {mu, sigma}
/// or logit {mu, scale}.
struct CostSpec {
  std::string family = "uniform";
  double a = 0.0;  // lo, k or mu
  double b = 1.0;  // hi, sigma or scale (unused for power)

  UnivariateDistribution distribution() const;
};

struct MarketConfig {
  double wage = 4.0;
  double delta0 = 1.0;
  double delta1 = 1.0;
  CostSpec cost;

  coate_loury::MarketModel model() const;
};

struct FitUnivariateConfig {
  std::size_t design_points = 200;
  std::size_t per_point_n = 50;
  std::size_t eval_points = 101;
};

struct FitMultivariateConfig {
  int actions = 3;
  std::size_t models = 200;
  std::size_t per_point_n = 100;
  double correlation = 0.0;  // equicorrelated Gaussian costs
  std::size_t mc_samples = 100000;
  double benefit_low = -1.0;
  double benefit_high = 1.0;
};

struct DesignRunConfig {
  std::size_t tau0 = 64;
  int episodes = 6;
  std::size_t per_point_n = 50;
  std::size_t mise_replications = 200;
  std::size_t rel_eval_points = 0;
  bool pool_episodes = false;
  double density_floor = 0.1;
  std::size_t grid_points = 512;
};

struct RegretRunConfig {
  std::size_t budget = 8192;
  std::size_t tau0 = 8;
  std::optional<double> alpha;
  std::size_t per_point_n = 50;
  std::size_t theta_grid_points = 256;
  double tail_fraction = 0.9;  // the window must span several doubling episodes
  double density_floor = 0.1;
  std::size_t grid_points = 512;
};

struct MapConvergenceConfig {
  int actions = 4;
  std::size_t models = 500;
  double noise_sd = 0.1;
  std::size_t step = 50;
  std::size_t mc_samples = 200000;
  double benefit_low = -1.0;
  double benefit_high = 1.0;
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::fit_univariate;
  std::uint64_t seed = 0;
  std::size_t replications = 1;
  std::string output_dir = "revperf_out";
  MarketConfig market;
  EstimatorKind estimator = EstimatorKind::isotonic;
  FitUnivariateConfig fit_univariate;
  FitMultivariateConfig fit_multivariate;
  DesignRunConfig design;
  RegretRunConfig regret;
  MapConvergenceConfig map_convergence;
};

/// Validates and converts a parsed JSON document. Unknown keys, sections that
/// do not belong to the experiment and out-of-range values raise ConfigError
/// naming the offending field ("design.tau0").
RunConfig parse_config(const nlohmann::json& document);

/// Reads and parses a JSON file. Syntax errors and field errors report the
/// line number in the file.
RunConfig load_config(const std::filesystem::path& path);

/// The fully resolved configuration (defaults filled in) as JSON.
nlohmann::json to_json(const RunConfig& config);

/// FNV-1a 64-bit hash of the canonical JSON text, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// A result file produced by an experiment.
struct Artifact {
  std::string name;
  std::string contents;
};

/// Runs `count` independent tasks on up to `threads` threads. Task i must only
/// write to its own slot; the lowest-index exception is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

struct MapConvergenceRow {
  std::size_t replication;
  std::size_t n;
  double cum_error;
};

/// Cumulative distribution-map error sum_{m <= N} ||D(theta_m) - D_hat(theta_m)||^2
/// for N = step, 2 step, ..., models, per replication. Gaussian N(0, I) costs
/// and benefits shared across replications come from rng.stream(0); the
/// observation noise of replication r comes from rng.stream(r + 1).
std::vector<MapConvergenceRow> map_convergence_experiment(const MapConvergenceConfig& config, std::size_t replications,
                                                const Rng& rng, unsigned threads = 1);
std::string map_convergence_csv(const std::vector<MapConvergenceRow>& rows);

/// Runs the configured experiment and returns its CSV, JSON and plot files
/// (without the manifest). Output depends only on the configuration.
std::vector<Artifact> run_artifacts(const RunConfig& config, unsigned threads = 1);

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::string> files;
  double wall_seconds = 0.0;
};

/// run_artifacts plus writing every file and manifest.json into
/// config.output_dir.
RunResult run_experiment(const RunConfig& config, unsigned threads = 1);

/// Command-line and environment overrides, applied in that order of
/// precedence over the config file: flag, then RNG_SEED / OUTPUT_DIR.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  bool use_environment = true;
};
void apply_overrides(RunConfig& config, const Overrides& overrides);

std::vector<std::string> preset_names();
/// Ready-made configuration for a named experiment; ConfigError if unknown.
nlohmann::json preset_config(const std::string& name);

}  // namespace revperf::harness
