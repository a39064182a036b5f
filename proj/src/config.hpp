#pragma once

#include <Eigen/Core>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "field.hpp"

namespace blochlab {

enum class ExperimentKind { bands, thomas, cover, gauge, matrix_gauge };
std::string to_string(ExperimentKind kind);

// Where a field comes from: a named preset, an inline literal, or a file in
// the literal format. `smoothness` is declared metadata (H^s exponent).
struct FieldSource {
  enum class Kind { zero, preset, literal, file } kind = Kind::zero;
  std::string preset;
  nlohmann::json params;  // preset parameters
  std::string literal;
  std::string path;
  std::optional<double> smoothness;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::bands;
  int dim = 1;
  int cutoff = 8;
  FieldSource potential;         // V
  FieldSource vector_potential;  // A
  FieldSource gauge_input;       // g or G for the dbar experiments

  // quasimomentum family
  Eigen::VectorXd direction;
  double beta = 0.5;
  std::vector<double> rho;

  // bands
  int grid_points = 33;
  int band_count = 5;
  double flat_tol = 1e-3;

  // cover / parametrix
  double delta = 0.5;
  double thickness = 1.0;
  int neumann_order = 2;
  std::string near_mode = "direct";  // "direct" | "model" (model: d=2 only)
  double sigma_floor = 10.0;
  bool dump_operator = false;

  // gauge
  double gauge_tol = 1e-8;
  int split_modes = 0;  // 0: plain gauge, >0: split_and_gauge band
  int plane_bound = 0;  // >0: run select_plane with this bound on A

  // matrix gauge
  int matrix_dim = 2;
  int max_iterations = 200;
  double damping = 1.0;

  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

struct ParsedConfig {
  ExperimentConfig config;
  std::vector<std::string> warnings;
};

// Strict parse: unknown keys, type mismatches, delta outside (0,1) and
// non-unit directions are config errors naming the offending path. A declared
// smoothness s <= 3d/2 - 1 on the vector potential produces a warning.
ParsedConfig parse_config(const std::string& text);

// Normalized echo with every default materialized; parse(emit(c)) == c.
nlohmann::json config_echo(const ExperimentConfig& config);

// Field realization (presets seeded from the config seed).
PeriodicField realize_field(const FieldSource& source, const Lattice& lattice, FieldRank rank,
                            std::uint64_t seed);

}  // namespace blochlab
