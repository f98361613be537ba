#include "revperf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "revperf/core_model.hpp"
#include "revperf/design.hpp"
#include "revperf/errors.hpp"
#include "revperf/monotone_fit.hpp"
#include "revperf/numerics.hpp"
#include "revperf/proportions.hpp"
#include "revperf/regret.hpp"

namespace revperf::harness {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::fit_univariate:
      return "fit-univariate";
    case ExperimentKind::fit_multivariate:
      return "fit-multivariate";
    case ExperimentKind::design_run:
      return "design-run";
    case ExperimentKind::regret_run:
      return "regret-run";
    case ExperimentKind::map_convergence:
      return "map-convergence";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::fit_univariate, ExperimentKind::fit_multivariate, ExperimentKind::design_run,
                 ExperimentKind::regret_run, ExperimentKind::map_convergence}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("experiment", "unknown experiment '" + name +
                                      "' (expected fit-univariate, fit-multivariate, design-run, regret-run or map-convergence)");
}

UnivariateDistribution CostSpec::distribution() const {
  if (family == "uniform") return UnivariateDistribution::uniform(a, b);
  if (family == "power") return UnivariateDistribution::power(a);
  if (family == "probit") return UnivariateDistribution::probit(a, b);
  if (family == "logit") return UnivariateDistribution::logit(a, b);
  throw ConfigError("market.cost.family", "unknown cost family '" + family + "'");
}

coate_loury::MarketModel MarketConfig::model() const {
  auto m = coate_loury::default_market(wage);
  m.delta0 = delta0;
  m.delta1 = delta1;
  m.cost = cost.distribution();
  return m;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be a JSON object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return node_.at(key);
  }

  double number(const std::string& key, double fallback, double lo, double hi, bool lo_open = false) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(join(path_, key), "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x > hi || (lo_open ? x <= lo : x < lo)) {
      std::ostringstream os;
      os << "value " << x << " outside " << (lo_open ? "(" : "[") << lo << ", " << hi << "]";
      throw ConfigError(join(path_, key), os.str());
    }
    return x;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback, std::uint64_t lo, std::uint64_t hi) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(join(path_, key), "must be a nonnegative integer");
    }
    const auto x = v.get<std::uint64_t>();
    if (x < lo || x > hi) {
      throw ConfigError(join(path_, key),
                        "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return x;
  }

  std::uint64_t required_integer(const std::string& key) {
    if (!has(key)) throw ConfigError(join(path_, key), "required field is missing");
    return integer(key, 0, 0, std::numeric_limits<std::uint64_t>::max());
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(join(path_, key), "must be true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(join(path_, key), "must be a string");
    return v.get<std::string>();
  }

  std::string required_text(const std::string& key) {
    if (!has(key)) throw ConfigError(join(path_, key), "required field is missing");
    return text(key, "");
  }

  std::optional<Section> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Section(raw(key), join(path_, key));
  }

  const std::string& path() const { return path_; }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!used_.count(item.key())) throw ConfigError(join(path_, item.key()), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

constexpr std::uint64_t kMaxCount = 100000000;

CostSpec parse_cost(Section s) {
  CostSpec c;
  c.family = s.text("family", "uniform");
  if (c.family == "uniform") {
    c.a = s.number("lo", 0.0, -1e6, 1e6);
    c.b = s.number("hi", 1.0, -1e6, 1e6);
    if (!(c.b > c.a)) throw ConfigError(s.path() + ".hi", "must exceed lo");
  } else if (c.family == "power") {
    c.a = s.number("k", 2.0, 0.0, 1e3, true);
    c.b = 1.0;
  } else if (c.family == "probit") {
    c.a = s.number("mu", 0.5, -1e6, 1e6);
    c.b = s.number("sigma", 0.2, 0.0, 1e6, true);
  } else if (c.family == "logit") {
    c.a = s.number("mu", 0.5, -1e6, 1e6);
    c.b = s.number("scale", 0.1, 0.0, 1e6, true);
  } else {
    throw ConfigError(s.path() + ".family", "unknown cost family '" + c.family + "' (uniform, power, probit, logit)");
  }
  s.finish();
  return c;
}

MarketConfig parse_market(Section s) {
  MarketConfig m;
  m.wage = s.number("wage", 4.0, 0.0, 1e6, true);
  m.delta0 = s.number("delta0", 1.0, 0.0, 1e6, true);
  m.delta1 = s.number("delta1", 1.0, 0.0, 1e6, true);
  if (auto c = s.child("cost")) m.cost = parse_cost(*c);
  s.finish();
  try {
    m.model().validate();
  } catch (const ModelError& e) {
    throw ConfigError(s.path(), e.what());
  }
  return m;
}

json cost_to_json(const CostSpec& c) {
  if (c.family == "uniform") return {{"family", c.family}, {"lo", c.a}, {"hi", c.b}};
  if (c.family == "power") return {{"family", c.family}, {"k", c.a}};
  if (c.family == "probit") return {{"family", c.family}, {"mu", c.a}, {"sigma", c.b}};
  return {{"family", c.family}, {"mu", c.a}, {"scale", c.b}};
}

bool uses_market(ExperimentKind k) {
  return k == ExperimentKind::fit_univariate || k == ExperimentKind::design_run || k == ExperimentKind::regret_run;
}

const char* section_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::fit_univariate:
      return "fit_univariate";
    case ExperimentKind::fit_multivariate:
      return "fit_multivariate";
    case ExperimentKind::design_run:
      return "design";
    case ExperimentKind::regret_run:
      return "regret";
    case ExperimentKind::map_convergence:
      return "map_convergence";
  }
  return "";
}

}  // namespace

RunConfig parse_config(const json& document) {
  Section root(document, "");
  RunConfig c;
  c.kind = experiment_kind_from_string(root.required_text("experiment"));
  c.seed = root.required_integer("seed");
  c.replications = root.integer("replications", 1, 1, 100000);
  c.output_dir = root.text("output_dir", c.output_dir);
  if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");

  for (const char* key : {"market", "estimator"}) {
    if (root.has(key) && !uses_market(c.kind)) {
      throw ConfigError(key, "not used by experiment " + to_string(c.kind) + " (its costs are Gaussian)");
    }
  }
  for (auto k : {ExperimentKind::fit_univariate, ExperimentKind::fit_multivariate, ExperimentKind::design_run,
                 ExperimentKind::regret_run, ExperimentKind::map_convergence}) {
    if (k != c.kind && root.has(section_name(k))) {
      throw ConfigError(section_name(k), "section belongs to experiment " + to_string(k) + ", not " + to_string(c.kind));
    }
  }

  if (auto m = root.child("market")) c.market = parse_market(*m);
  if (root.has("estimator")) {
    const std::string name = root.text("estimator", "isotonic");
    try {
      c.estimator = estimator_kind_from_string(name);
    } catch (const ArgumentError&) {
      throw ConfigError("estimator", "unknown estimator '" + name +
                                         "' (isotonic, parametric-probit, parametric-logit, oracle)");
    }
  }

  switch (c.kind) {
    case ExperimentKind::fit_univariate: {
      if (c.replications != 1) throw ConfigError("replications", "fit-univariate produces a single fit; use 1");
      auto& f = c.fit_univariate;
      if (auto s = root.child("fit_univariate")) {
        f.design_points = s->integer("design_points", f.design_points, 1, kMaxCount);
        f.per_point_n = s->integer("per_point_n", f.per_point_n, 1, kMaxCount);
        f.eval_points = s->integer("eval_points", f.eval_points, 2, kMaxCount);
        s->finish();
      }
      if (c.estimator != EstimatorKind::isotonic && c.estimator != EstimatorKind::oracle && f.design_points < 2) {
        throw ConfigError("fit_univariate.design_points", "parametric fits need at least 2 design points");
      }
      break;
    }
    case ExperimentKind::fit_multivariate: {
      auto& f = c.fit_multivariate;
      if (auto s = root.child("fit_multivariate")) {
        f.actions = static_cast<int>(s->integer("actions", f.actions, 2, 8));
        f.models = s->integer("models", f.models, 1, 100000);
        f.per_point_n = s->integer("per_point_n", f.per_point_n, 1, kMaxCount);
        f.correlation = s->number("correlation", f.correlation, -1.0 / (f.actions - 1), 1.0, true);
        f.mc_samples = s->integer("mc_samples", f.mc_samples, 1000, kMaxCount);
        f.benefit_low = s->number("benefit_low", f.benefit_low, -1e3, 1e3);
        f.benefit_high = s->number("benefit_high", f.benefit_high, -1e3, 1e3);
        if (!(f.benefit_high > f.benefit_low)) throw ConfigError("fit_multivariate.benefit_high", "must exceed benefit_low");
        if (f.correlation >= 1.0) throw ConfigError("fit_multivariate.correlation", "must be below 1");
        s->finish();
      }
      break;
    }
    case ExperimentKind::design_run: {
      auto& d = c.design;
      if (auto s = root.child("design")) {
        d.tau0 = s->integer("tau0", d.tau0, 2, kMaxCount);
        d.episodes = static_cast<int>(s->integer("episodes", d.episodes, 1, 24));
        d.per_point_n = s->integer("per_point_n", d.per_point_n, 1, kMaxCount);
        d.mise_replications = s->integer("mise_replications", d.mise_replications, 1, kMaxCount);
        d.rel_eval_points = s->integer("rel_eval_points", d.rel_eval_points, 0, kMaxCount);
        d.pool_episodes = s->flag("pool_episodes", d.pool_episodes);
        d.density_floor = s->number("density_floor", d.density_floor, 0.0, 1.0, true);
        d.grid_points = s->integer("grid_points", d.grid_points, 2, 1000000);
        s->finish();
      }
      if ((d.tau0 << (d.episodes - 1)) > kMaxCount) throw ConfigError("design.episodes", "final episode is too long");
      break;
    }
    case ExperimentKind::regret_run: {
      auto& r = c.regret;
      if (auto s = root.child("regret")) {
        r.budget = s->integer("budget", r.budget, 2, kMaxCount);
        r.tau0 = s->integer("tau0", r.tau0, 2, kMaxCount);
        if (s->has("alpha")) r.alpha = s->number("alpha", 0.75, 0.0, 1.0, true);
        r.per_point_n = s->integer("per_point_n", r.per_point_n, 1, kMaxCount);
        r.theta_grid_points = s->integer("theta_grid_points", r.theta_grid_points, 2, 1000000);
        r.tail_fraction = s->number("tail_fraction", r.tail_fraction, 0.0, 1.0, true);
        r.density_floor = s->number("density_floor", r.density_floor, 0.0, 1.0, true);
        r.grid_points = s->integer("grid_points", r.grid_points, 2, 1000000);
        s->finish();
      }
      if (r.budget < r.tau0) throw ConfigError("regret.budget", "must be at least tau0");
      break;
    }
    case ExperimentKind::map_convergence: {
      auto& a = c.map_convergence;
      if (auto s = root.child("map_convergence")) {
        a.actions = static_cast<int>(s->integer("actions", a.actions, 2, 8));
        a.models = s->integer("models", a.models, 1, 100000);
        a.noise_sd = s->number("noise_sd", a.noise_sd, 0.0, 10.0);
        a.step = s->integer("step", a.step, 1, 100000);
        a.mc_samples = s->integer("mc_samples", a.mc_samples, 1000, kMaxCount);
        a.benefit_low = s->number("benefit_low", a.benefit_low, -1e3, 1e3);
        a.benefit_high = s->number("benefit_high", a.benefit_high, -1e3, 1e3);
        if (!(a.benefit_high > a.benefit_low)) throw ConfigError("map_convergence.benefit_high", "must exceed benefit_low");
        s->finish();
      }
      if (a.step > a.models) throw ConfigError("map_convergence.step", "must not exceed models");
      break;
    }
  }
  root.finish();
  return c;
}

namespace {

std::size_t line_of_field(const std::string& text, const std::string& field) {
  std::size_t pos = 0;
  std::size_t start = 0;
  while (start <= field.size()) {
    const auto dot = field.find('.', start);
    const std::string key = field.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    const auto found = text.find("\"" + key + "\"", pos);
    if (found == std::string::npos) return 0;
    pos = found;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n')) + 1;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json document;
  try {
    document = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n') + 1;
    throw ConfigError("<json>", path.string() + " line " + std::to_string(line) + ": " + e.what());
  }
  try {
    return parse_config(document);
  } catch (const ConfigError& e) {
    const auto line = line_of_field(text, e.field());
    if (line == 0) throw;
    throw ConfigError(e.field(), e.detail() + " (" + path.string() + " line " + std::to_string(line) + ")");
  }
}

json to_json(const RunConfig& c) {
  json j = {{"experiment", to_string(c.kind)},
            {"seed", c.seed},
            {"replications", c.replications},
            {"output_dir", c.output_dir}};
  if (uses_market(c.kind)) {
    j["market"] = {{"wage", c.market.wage},
                   {"delta0", c.market.delta0},
                   {"delta1", c.market.delta1},
                   {"cost", cost_to_json(c.market.cost)}};
    j["estimator"] = revperf::to_string(c.estimator);
  }
  switch (c.kind) {
    case ExperimentKind::fit_univariate: {
      const auto& f = c.fit_univariate;
      j["fit_univariate"] = {
          {"design_points", f.design_points}, {"per_point_n", f.per_point_n}, {"eval_points", f.eval_points}};
      break;
    }
    case ExperimentKind::fit_multivariate: {
      const auto& f = c.fit_multivariate;
      j["fit_multivariate"] = {{"actions", f.actions},         {"models", f.models},
                               {"per_point_n", f.per_point_n}, {"correlation", f.correlation},
                               {"mc_samples", f.mc_samples},   {"benefit_low", f.benefit_low},
                               {"benefit_high", f.benefit_high}};
      break;
    }
    case ExperimentKind::design_run: {
      const auto& d = c.design;
      j["design"] = {{"tau0", d.tau0},
                     {"episodes", d.episodes},
                     {"per_point_n", d.per_point_n},
                     {"mise_replications", d.mise_replications},
                     {"rel_eval_points", d.rel_eval_points},
                     {"pool_episodes", d.pool_episodes},
                     {"density_floor", d.density_floor},
                     {"grid_points", d.grid_points}};
      break;
    }
    case ExperimentKind::regret_run: {
      const auto& r = c.regret;
      j["regret"] = {{"budget", r.budget},
                     {"tau0", r.tau0},
                     {"per_point_n", r.per_point_n},
                     {"theta_grid_points", r.theta_grid_points},
                     {"tail_fraction", r.tail_fraction},
                     {"density_floor", r.density_floor},
                     {"grid_points", r.grid_points}};
      if (r.alpha) j["regret"]["alpha"] = *r.alpha;
      break;
    }
    case ExperimentKind::map_convergence: {
      const auto& a = c.map_convergence;
      j["map_convergence"] = {{"actions", a.actions},       {"models", a.models},
                         {"noise_sd", a.noise_sd},     {"step", a.step},
                         {"mc_samples", a.mc_samples}, {"benefit_low", a.benefit_low},
                         {"benefit_high", a.benefit_high}};
      break;
    }
  }
  return j;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void apply_overrides(RunConfig& config, const Overrides& overrides) {
  if (overrides.use_environment) {
    if (const char* s = std::getenv("RNG_SEED"); s != nullptr && *s != '\0') {
      const std::string v(s);
      if (v.find_first_not_of("0123456789") != std::string::npos || v.size() > 20) {
        throw ConfigError("RNG_SEED", "environment override '" + v + "' is not an unsigned 64-bit integer");
      }
      try {
        config.seed = std::stoull(v);
      } catch (const std::exception&) {
        throw ConfigError("RNG_SEED", "environment override '" + v + "' is not an unsigned 64-bit integer");
      }
    }
    if (const char* s = std::getenv("OUTPUT_DIR"); s != nullptr && *s != '\0') config.output_dir = s;
  }
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.output_dir) {
    if (overrides.output_dir->empty()) throw ConfigError("output_dir", "must not be empty");
    config.output_dir = *overrides.output_dir;
  }
}

// ---------------------------------------------------------------------------
// Experiments

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  const auto workers = static_cast<std::size_t>(std::max(1u, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(workers, count); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

std::string gnuplot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                    const std::string& plot_command, bool log_scale = false) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set title '" << title << "'\n"
     << "set xlabel '" << xlabel << "'\n"
     << "set ylabel '" << ylabel << "'\n"
     << "set key top left\n";
  if (log_scale) os << "set logscale xy\n";
  os << "plot " << plot_command << '\n';
  return os.str();
}

std::vector<Artifact> fit_univariate_artifacts(const RunConfig& c) {
  const auto market = c.market.model();
  const auto& f = c.fit_univariate;
  const auto range = coate_loury::incentive_range(market);
  Rng rng = Rng(c.seed).stream(0);
  const auto density = DesignDensity::uniform(range.max);
  std::vector<UnivariateObservation> obs;
  obs.reserve(f.design_points);
  for (double b : sample_design(density, f.design_points, rng)) {
    const double theta = coate_loury::threshold_for_incentive(market, range, b);
    const auto sample = coate_loury::simulate_market(market, theta, f.per_point_n, rng);
    std::size_t skilled = 0;
    for (int a : sample.action) skilled += static_cast<std::size_t>(a);
    obs.push_back({b, static_cast<double>(skilled) / static_cast<double>(f.per_point_n), static_cast<double>(f.per_point_n)});
  }
  const auto estimate = estimate_cdf(c.estimator, obs, market.cost.cdf);

  std::ostringstream csv;
  csv << "b,f_hat,f_true\n";
  for (double b : linspace(0.0, range.max, f.eval_points)) {
    csv << format_double(b) << ',' << format_double(estimate(b)) << ',' << format_double(market.cost.cdf(b)) << '\n';
  }
  json fit = {{"estimator", revperf::to_string(c.estimator)}};
  if (estimate.isotonic) fit["fit"] = estimate.isotonic->to_json();
  if (estimate.parametric) fit["fit"] = estimate.parametric->to_json();
  return {{"fit_univariate.csv", csv.str()},
          {"fit_univariate.json", fit.dump(2) + "\n"},
          {"fit_univariate.gp",
           gnuplot("Estimated cost CDF", "benefit gap b", "F(b)",
                   "'fit_univariate.csv' using 1:2 with steps title 'estimate', "
                   "'' using 1:3 with lines title 'truth'")}};
}

CostModel equicorrelated_gaussian(int actions, double correlation) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(actions, actions, correlation);
  cov.diagonal().setOnes();
  return CostModel::gaussian(Eigen::VectorXd::Zero(actions), cov);
}

BenefitProfile identity_profile(int actions) {
  return {ActionSpace(actions), [](std::span<const double> theta) { return std::vector<double>(theta.begin(), theta.end()); },
          {}};
}

std::vector<ContrastMatrix> nonzero_contrasts(int actions) {
  std::vector<ContrastMatrix> out;
  for (int a = 1; a < actions; ++a) out.push_back(contrast_matrix(a, actions));
  return out;
}

// Benefit vectors of M models and their true choice probabilities.
struct GaussianSetup {
  std::vector<std::vector<double>> benefits;
  std::vector<std::vector<double>> truth;
  // gaps[a - 1][m] = L_a B_m
  std::vector<std::vector<std::vector<double>>> gaps;
};

GaussianSetup gaussian_setup(const CostModel& cost, std::size_t models, double lo, double hi, std::size_t mc_samples,
                             Rng& rng) {
  const int k = cost.count();
  GaussianSetup s;
  s.benefits.resize(models, std::vector<double>(k));
  for (auto& b : s.benefits)
    for (auto& v : b) v = rng.uniform(lo, hi);
  for (const auto& b : s.benefits) s.truth.push_back(exact_choice_probabilities(cost, b, mc_samples, rng));
  const auto contrasts = nonzero_contrasts(k);
  s.gaps.resize(contrasts.size());
  for (std::size_t a = 0; a < contrasts.size(); ++a)
    for (const auto& b : s.benefits) s.gaps[a].push_back(contrasts[a].apply(b));
  return s;
}

// Per-action monotone fits on the first n models, assembled into a map.
DistributionMapEstimate fit_map(const GaussianSetup& s, const std::vector<std::vector<double>>& observed,
                                std::size_t n, double weight, int actions) {
  std::vector<MonotoneFit> fits;
  const std::vector<double> w(n, weight);
  for (int a = 1; a < actions; ++a) {
    std::vector<std::vector<double>> points(s.gaps[a - 1].begin(), s.gaps[a - 1].begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> y(n);
    for (std::size_t m = 0; m < n; ++m) y[m] = observed[m][a];
    fits.push_back(fit_monotone_multivariate(std::move(points), y, w));
  }
  return assemble_distribution_map(std::move(fits), nonzero_contrasts(actions), identity_profile(actions));
}

std::vector<Artifact> fit_multivariate_artifacts(const RunConfig& c, unsigned threads) {
  const auto& f = c.fit_multivariate;
  const auto cost = equicorrelated_gaussian(f.actions, f.correlation);
  const Rng master(c.seed);
  Rng setup_rng = master.stream(0);
  const auto setup = gaussian_setup(cost, f.models, f.benefit_low, f.benefit_high, f.mc_samples, setup_rng);

  struct Replication {
    std::vector<std::vector<double>> observed;
    std::vector<std::vector<double>> estimated;
    json fits;
  };
  std::vector<Replication> results(c.replications);
  parallel_for(c.replications, threads, [&](std::size_t r) {
    Rng rng = master.stream(r + 1);
    auto& out = results[r];
    for (const auto& b : setup.benefits) {
      const auto actions = sample_actions(cost, b, f.per_point_n, rng);
      out.observed.push_back(estimate_direct(actions, f.actions));
    }
    const auto map = fit_map(setup, out.observed, f.models, static_cast<double>(f.per_point_n), f.actions);
    for (const auto& b : setup.benefits) out.estimated.push_back(map.evaluate_benefits(b));
    out.fits = json::array();
    for (const auto& fit : map.fits()) out.fits.push_back(fit.to_json());
  });

  std::ostringstream csv;
  csv << "replication,model,action,p_true,p_obs,p_hat\n";
  json fits = json::array();
  for (std::size_t r = 0; r < results.size(); ++r) {
    for (std::size_t m = 0; m < f.models; ++m) {
      for (int a = 0; a < f.actions; ++a) {
        csv << r << ',' << m << ',' << a << ',' << format_double(setup.truth[m][a]) << ','
            << format_double(results[r].observed[m][a]) << ',' << format_double(results[r].estimated[m][a]) << '\n';
      }
    }
    fits.push_back({{"replication", r}, {"actions", results[r].fits}});
  }
  return {{"fit_multivariate.csv", csv.str()},
          {"fit_multivariate_fits.json", fits.dump() + "\n"},
          {"fit_multivariate.gp", gnuplot("Estimated vs true choice probabilities", "true", "estimated",
                                          "'fit_multivariate.csv' using 4:6 with points pt 7 ps 0.4 title 'D_hat', "
                                          "x with lines title 'identity'")}};
}

std::vector<Artifact> design_artifacts(const RunConfig& c, unsigned threads) {
  SequentialDesignConfig cfg;
  cfg.market = c.market.model();
  cfg.tau0 = c.design.tau0;
  cfg.episodes = c.design.episodes;
  cfg.per_point_n = c.design.per_point_n;
  cfg.mise_replications = c.design.mise_replications;
  cfg.rel_eval_points = c.design.rel_eval_points;
  cfg.pool_episodes = c.design.pool_episodes;
  cfg.estimator = c.estimator;
  cfg.density_floor = c.design.density_floor;
  cfg.grid_points = c.design.grid_points;

  const Rng master(c.seed);
  std::vector<EpisodeTrace> traces(c.replications);
  parallel_for(c.replications, threads, [&](std::size_t r) { traces[r] = run_sequential_design(cfg, master.stream(r)); });

  std::ostringstream summary, per_rep;
  summary << "episode,length,mise,mise_dstar,rel\n";
  per_rep << "replication,episode,length,mise,mise_dstar,rel\n";
  for (int k = 0; k < cfg.episodes; ++k) {
    std::vector<double> mise, mise_dstar, rel;
    for (const auto& t : traces) {
      mise.push_back(t.episodes[k].mise);
      mise_dstar.push_back(t.episodes[k].mise_dstar);
      rel.push_back(t.episodes[k].rel);
    }
    summary << k + 1 << ',' << traces[0].episodes[k].length << ',' << format_double(median(mise)) << ','
            << format_double(median(mise_dstar)) << ',' << format_double(median(rel)) << '\n';
  }
  for (std::size_t r = 0; r < traces.size(); ++r) {
    for (const auto& e : traces[r].episodes) {
      per_rep << r << ',' << e.episode << ',' << e.length << ',' << format_double(e.mise) << ','
              << format_double(e.mise_dstar) << ',' << format_double(e.rel) << '\n';
    }
  }
  return {{"design_run.csv", summary.str()},
          {"design_run_replications.csv", per_rep.str()},
          {"design_run.gp", gnuplot("Relative efficiency loss (median over replications)", "episode", "REL",
                                    "'design_run.csv' using 1:5 with linespoints title 'REL'")}};
}

std::vector<Artifact> regret_artifacts(const RunConfig& c, unsigned threads) {
  RegretConfig cfg;
  cfg.market = c.market.model();
  cfg.budget = c.regret.budget;
  cfg.tau0 = c.regret.tau0;
  cfg.alpha = c.regret.alpha;
  cfg.per_point_n = c.regret.per_point_n;
  cfg.theta_grid = default_theta_grid(c.regret.theta_grid_points);
  cfg.estimator = c.estimator;
  cfg.density_floor = c.regret.density_floor;
  cfg.grid_points = c.regret.grid_points;

  const Rng master(c.seed);
  std::vector<RegretTrace> traces(c.replications);
  parallel_for(c.replications, threads, [&](std::size_t r) { traces[r] = run_regret_experiment(cfg, master.stream(r)); });

  std::vector<Artifact> out;
  std::ostringstream summary, diagnostics, plot;
  summary << "replication,exponent,total_regret,exploitation_regret,optimal_theta,optimal_pr\n";
  diagnostics << "replication,episode,theta_hat,risk_gap,risk_bound\n";
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const auto& t = traces[r];
    const std::string name = "regret_run_" + std::to_string(r) + ".csv";
    out.push_back({name, t.to_csv()});
    std::optional<double> exponent;
    if (t.deployments.size() >= 16) exponent = fit_growth_exponent(t, c.regret.tail_fraction);
    summary << r << ',' << (exponent ? format_double(*exponent) : "NA") << ','
            << format_double(t.deployments.empty() ? 0.0 : t.deployments.back().regret_cum) << ','
            << format_double(t.exploitation_regret()) << ',' << format_double(t.optimal_theta) << ','
            << format_double(t.optimal_risk) << '\n';
    for (const auto& d : t.diagnostics) {
      diagnostics << r << ',' << d.episode << ',' << format_double(d.theta_hat) << ',' << format_double(d.risk_gap)
                  << ',' << format_double(d.risk_bound) << '\n';
    }
    plot << (r == 0 ? "" : ", ") << "'" << name << "' using 1:7 with lines title 'replication " << r << "'";
  }
  out.push_back({"regret_summary.csv", summary.str()});
  out.push_back({"regret_diagnostics.csv", diagnostics.str()});
  out.push_back({"regret_run.gp", gnuplot("Cumulative regret", "deployment m", "regret", plot.str(), true)});
  return out;
}

}  // namespace

std::vector<MapConvergenceRow> map_convergence_experiment(const MapConvergenceConfig& config, std::size_t replications,
                                                const Rng& rng, unsigned threads) {
  if (config.actions < 2) throw ArgumentError("map_convergence_experiment: need at least 2 actions");
  if (config.step == 0 || config.step > config.models) throw ArgumentError("map_convergence_experiment: bad step");
  const auto cost = equicorrelated_gaussian(config.actions, 0.0);
  Rng setup_rng = rng.stream(0);
  const auto setup =
      gaussian_setup(cost, config.models, config.benefit_low, config.benefit_high, config.mc_samples, setup_rng);
  std::vector<std::size_t> sizes;
  for (std::size_t n = config.step; n <= config.models; n += config.step) sizes.push_back(n);
  if (sizes.back() != config.models) sizes.push_back(config.models);

  std::vector<std::vector<MapConvergenceRow>> per_rep(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    Rng noise = rng.stream(r + 1);
    std::vector<std::vector<double>> observed = setup.truth;
    for (auto& p : observed)
      for (int a = 1; a < config.actions; ++a) p[a] = std::clamp(p[a] + config.noise_sd * noise.normal(), 0.0, 1.0);
    for (std::size_t n : sizes) {
      const auto map = fit_map(setup, observed, n, 1.0, config.actions);
      double total = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        const auto d_hat = map.evaluate_benefits(setup.benefits[m]);
        for (int a = 0; a < config.actions; ++a) total += (d_hat[a] - setup.truth[m][a]) * (d_hat[a] - setup.truth[m][a]);
      }
      per_rep[r].push_back({r, n, total});
    }
  });
  std::vector<MapConvergenceRow> rows;
  for (const auto& v : per_rep) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

std::string map_convergence_csv(const std::vector<MapConvergenceRow>& rows) {
  std::ostringstream os;
  os << "replication,N,cum_error\n";
  for (const auto& r : rows) os << r.replication << ',' << r.n << ',' << format_double(r.cum_error) << '\n';
  return os.str();
}

std::vector<Artifact> run_artifacts(const RunConfig& config, unsigned threads) {
  switch (config.kind) {
    case ExperimentKind::fit_univariate:
      return fit_univariate_artifacts(config);
    case ExperimentKind::fit_multivariate:
      return fit_multivariate_artifacts(config, threads);
    case ExperimentKind::design_run:
      return design_artifacts(config, threads);
    case ExperimentKind::regret_run:
      return regret_artifacts(config, threads);
    case ExperimentKind::map_convergence: {
      const auto rows = map_convergence_experiment(config.map_convergence, config.replications, Rng(config.seed), threads);
      return {{"map_convergence.csv", map_convergence_csv(rows)},
              {"map_convergence.gp", gnuplot("Cumulative distribution-map error", "N", "sum of squared errors",
                                        "'map_convergence.csv' using 2:3 with points pt 7 title 'replications'")}};
    }
  }
  return {};
}

RunResult run_experiment(const RunConfig& config, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  const auto artifacts = run_artifacts(config, threads);
  RunResult result;
  result.output_dir = config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(result.output_dir, ec);
  if (ec) throw Error("cannot create output directory " + result.output_dir.string() + ": " + ec.message());
  for (const auto& a : artifacts) {
    std::ofstream out(result.output_dir / a.name, std::ios::binary);
    out << a.contents;
    if (!out) throw Error("cannot write " + (result.output_dir / a.name).string());
    result.files.push_back(a.name);
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json manifest = {{"version", kVersion},
                         {"experiment", to_string(config.kind)},
                         {"seed", config.seed},
                         {"config", to_json(config)},
                         {"config_hash", config_hash(config)},
                         {"files", result.files},
                         {"threads", threads},
                         {"wall_clock_seconds", result.wall_seconds}};
  std::ofstream out(result.output_dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) throw Error("cannot write manifest.json");
  return result;
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() {
  return {"fit-univariate", "fit-multivariate", "design-uniform", "design-power",  "design-probit",
          "regret-isotonic", "regret-oracle",   "regret-probit",  "map-convergence-4", "map-convergence-5"};
}

json preset_config(const std::string& name) {
  json j = {{"seed", 42}, {"output_dir", "out/" + name}};
  const json uniform = {{"family", "uniform"}, {"lo", 0.0}, {"hi", 1.0}};
  if (name == "fit-univariate") {
    j["experiment"] = "fit-univariate";
    j["market"] = {{"wage", 4.0}, {"cost", {{"family", "probit"}, {"mu", 0.5}, {"sigma", 0.2}}}};
    j["fit_univariate"] = {{"design_points", 200}, {"per_point_n", 50}, {"eval_points", 201}};
  } else if (name == "fit-multivariate") {
    j["experiment"] = "fit-multivariate";
    j["fit_multivariate"] = {{"actions", 3}, {"models", 200}, {"per_point_n", 100}};
  } else if (name.rfind("design-", 0) == 0) {
    j["experiment"] = "design-run";
    j["replications"] = 10;
    json cost = uniform;
    if (name == "design-power") {
      cost = {{"family", "power"}, {"k", 2.0}};
    } else if (name == "design-probit") {
      cost = {{"family", "probit"}, {"mu", 0.5}, {"sigma", 0.2}};
    } else if (name != "design-uniform") {
      throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    j["market"] = {{"wage", 4.0}, {"cost", cost}};
    j["design"] = {{"tau0", 64}, {"episodes", 6}, {"per_point_n", 50}};
  } else if (name.rfind("regret-", 0) == 0) {
    j["experiment"] = "regret-run";
    j["regret"] = {{"budget", 8192}, {"tau0", 8}};
    j["market"] = {{"wage", 4.0}, {"cost", uniform}};
    if (name == "regret-isotonic") {
      j["replications"] = 10;
      j["estimator"] = "isotonic";
      j["regret"]["alpha"] = 0.75;
    } else if (name == "regret-oracle") {
      j["estimator"] = "oracle";
      j["regret"]["alpha"] = 0.75;
    } else if (name == "regret-probit") {
      j["replications"] = 10;
      j["estimator"] = "parametric-probit";
      j["market"]["cost"] = {{"family", "probit"}, {"mu", 0.5}, {"sigma", 0.2}};
    } else {
      throw ConfigError("preset", "unknown preset '" + name + "'");
    }
  } else if (name == "map-convergence-4" || name == "map-convergence-5") {
    j["experiment"] = "map-convergence";
    j["replications"] = 10;
    j["map_convergence"] = {{"actions", name == "map-convergence-4" ? 4 : 5}, {"models", 500}, {"noise_sd", 0.1}, {"step", 50}};
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "'");
  }
  return j;
}

}  // namespace revperf::harness
