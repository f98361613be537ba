#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "revperf/errors.hpp"
#include "revperf/harness.hpp"

namespace h = revperf::harness;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--out", o.out, "Output directory (overrides OUTPUT_DIR and the config)");
  cmd->add_option("--seed", o.seed, "RNG seed (overrides RNG_SEED and the config)");
  cmd->add_option("--threads", o.threads, "Worker threads for independent replications")
      ->check(CLI::Range(1u, 1024u));
}

int execute(h::RunConfig config, const CommonOptions& o) {
  h::apply_overrides(config, {o.seed, o.out, true});
  const auto result = h::run_experiment(config, o.threads);
  std::cout << h::to_string(config.kind) << ": wrote " << result.files.size() + 1 << " files to "
            << result.output_dir.string() << " in " << result.wall_seconds << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Performative-risk experiments: distribution-map estimation, sequential design and regret"};
  app.set_version_flag("--version", std::string(h::kVersion));
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("--config", config_path, "Path to the JSON config")->required();
  add_common(run, run_opts);

  CommonOptions preset_opts;
  std::string preset_name;
  bool print_only = false;
  auto* preset = app.add_subcommand("preset", "Run a built-in experiment configuration");
  preset->add_option("name", preset_name, "Preset name (see `presets`)")->required();
  preset->add_flag("--print", print_only, "Print the preset config instead of running it");
  add_common(preset, preset_opts);

  app.add_subcommand("presets", "List the built-in configurations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return execute(h::load_config(config_path), run_opts);
    if (*preset) {
      const auto document = h::preset_config(preset_name);
      if (print_only) {
        std::cout << document.dump(2) << '\n';
        return 0;
      }
      return execute(h::parse_config(document), preset_opts);
    }
    for (const auto& name : h::preset_names()) std::cout << name << '\n';
    return 0;
  } catch (const revperf::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const revperf::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const revperf::IllConditionedError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const revperf::DegenerateModelError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const revperf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
