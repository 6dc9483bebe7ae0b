#pragma once
// Experiment configuration, dispatch and output for the zenolab CLI.
//
// A config is one JSON document. Unknown keys anywhere are rejected. Each run
// writes one CSV table per experiment plus manifest.json holding the config
// echo, versions, seed, summary scalars, emitted files and wall-clock time.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zeno/atom_field.hpp"
#include "zeno/detector.hpp"

namespace zeno::app {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kManifestSchema = 1;

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitThresholdFailed = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitRuntime = 3;

enum class ExperimentKind { survival, theorem_check, zeno_scan, lattice_verify, detector_sweep };

ExperimentKind parse_kind(const std::string& name);
std::string kind_name(ExperimentKind kind);

struct SurvivalSettings {
  std::int64_t stride = 1;
  std::size_t alpha_window = 4;
  std::optional<std::pair<double, double>> decay_window;  // default [t_max/2, t_max]
};

struct TheoremSettings {
  double t_final = 3.0;
  std::vector<std::int64_t> n_list{1, 4, 16, 64};
  std::string region = "wave";
  std::vector<std::string> spacings{"equal", "unequal"};
};

struct ZenoSettings {
  double t_fixed = 1.0;
  std::vector<double> dt_list{0.2, 0.1, 0.05, 0.025};
  std::string region = "whole";
  std::size_t max_branches = std::size_t{1} << 14;
};

struct LatticeSettings {
  double theta = 0.3;
  double phase = 0.0;
  std::size_t ring_length = 4;
  std::int64_t horizon = 64;
  std::size_t window = 8;
  std::int64_t product_n_max = 20;
  std::int64_t schedule_n_max = 10;
  std::size_t lemma_trials = 16;
};

struct DetectorSettings {
  double x_minus = 1.0;
  double x_plus = 1.5;
  std::int64_t n_k = 16;
  double k_max = 8.0;
  std::vector<double> lambda_list{0.0, 0.5, 2.0};
  std::int64_t stride = 4;
};

struct McSettings {
  std::size_t n_traj = 100000;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::survival;
  nlohmann::ordered_json raw;  // the document as given
  atom_field::ModelParams model;
  SurvivalSettings survival;
  TheoremSettings theorem;
  ZenoSettings zeno;
  LatticeSettings lattice;
  DetectorSettings detector;
  McSettings mc;
  std::map<std::string, double> thresholds;
  std::filesystem::path output_dir = "zenolab_out";
};

// Parses and validates a config for `kind`; throws InvalidArgument.
ExperimentConfig parse_config(const nlohmann::ordered_json& doc, ExperimentKind kind);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind kind);

struct RunResult {
  std::vector<std::string> files;
  nlohmann::ordered_json summaries = nlohmann::ordered_json::object();
  std::vector<std::string> failed_thresholds;
  double wall_clock_s = 0.0;
  std::uint64_t seed = 0;
  nlohmann::ordered_json manifest;

  bool thresholds_met() const { return failed_thresholds.empty(); }
};

// Runs the experiment, writes CSV + manifest.json under config.output_dir.
RunResult run_experiment(const ExperimentConfig& config, unsigned threads = 1);

// Formats a double so it round-trips exactly.
std::string format_double(double v);

}  // namespace zeno::app
