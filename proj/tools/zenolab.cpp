// zenolab: runs one experiment from a JSON config and writes CSV + manifest.

#include <cstdio>
#include <exception>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "zeno/common.hpp"
#include "zeno/experiment.hpp"

int main(int argc, char** argv) {
  using namespace zeno;
  CLI::App app{"zenolab: measured-survival experiments on conveyor lattices and atom-field models"};
  app.set_version_flag("--version", std::string(app::kToolVersion));

  std::string experiment;
  std::string config_path;
  std::string out_dir;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t seed = 0;

  app.add_option("experiment", experiment, "survival | theorem-check | zeno-scan | lattice-verify | detector-sweep")
      ->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_dir, "output directory (overrides output_dir in the config)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : app::kExitInvalidConfig;
  }

  app::ExperimentConfig config;
  try {
    const auto kind = app::parse_kind(experiment);
    config = app::load_config(config_path, kind);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed_opt->count() > 0) config.mc.seed = seed;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "zenolab: invalid config: %s\n", e.what());
    return app::kExitInvalidConfig;
  }

  try {
    const app::RunResult result = app::run_experiment(config, threads);
    for (const auto& f : result.files) std::printf("wrote %s\n", (config.output_dir / f).string().c_str());
    std::printf("wrote %s\n", (config.output_dir / "manifest.json").string().c_str());
    std::printf("%s\n", result.summaries.dump().c_str());
    if (!result.thresholds_met()) {
      for (const auto& name : result.failed_thresholds) std::fprintf(stderr, "zenolab: threshold failed: %s\n", name.c_str());
      return app::kExitThresholdFailed;
    }
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "zenolab: invalid config: %s\n", e.what());
    return app::kExitInvalidConfig;
  } catch (const HorizonError& e) {
    std::fprintf(stderr, "zenolab: horizon violation: %s\n", e.what());
    return app::kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "zenolab: runtime error: %s\n", e.what());
    return app::kExitRuntime;
  }
  return app::kExitOk;
}
