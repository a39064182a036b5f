#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace blochlab {

inline constexpr const char* kVersion = "0.1.0";

struct StageOutput {
  std::string name;      // logical stage ("scan", "bands", ...)
  std::string filename;  // relative to the output directory
  std::string checksum;  // fnv1a-64 of the emitted bytes
};

struct RunManifest {
  nlohmann::json config;  // normalized echo; reruns reconstruct from this
  std::string version;
  std::string kind;
  std::uint64_t seed;
  double wall_seconds;
  std::vector<StageOutput> outputs;
  std::vector<std::string> warnings;
  std::string manifest_path;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> expected_kind;  // CLI subcommand guard
};

// Runs the experiment, writes CSV/JSON outputs plus manifest.json (written
// last). Obstructed / diverged gauge verdicts are results, not errors.
RunManifest run_experiment(const ExperimentConfig& config, const std::vector<std::string>& warnings);

RunManifest run_config_text(const std::string& text, const RunOverrides& overrides = {});
RunManifest run_config_file(const std::string& path, const RunOverrides& overrides = {});

// Re-run from an emitted manifest: extracts the config echo and executes it
// (CSV outputs are byte-identical to the original run).
RunManifest run_manifest_file(const std::string& path, const RunOverrides& overrides = {});

}  // namespace blochlab
