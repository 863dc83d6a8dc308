#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moldflux/benchmark_cases.hpp"

namespace moldflux {

// Everything the CLI commands need, parsed from one JSON file with named
// sections.  Parsing is strict: an unknown key anywhere raises ConfigError.
// Omitted sections fall back to the standard benchmark setup (copper mold
// parameters, mesh5, 10x10 sensors at y = 0.02).
struct RunConfig {
  Geometry geometry{2.0, 0.1, 1.2};
  PhysicalParams params{383.0, 8940.0, 390.0, 5.66e4, 350.0, 350.0};
  TimeGrid grid{50.0, 0.5, 1.0};
  MeshSpec mesh;

  std::int64_t sensor_count_x = 10;
  std::int64_t sensor_count_z = 10;
  double sensor_y = 0.02;

  double eta = 0.0;  // 0: spacing-based default
  TimeBasis time_basis = TimeBasis::Constant;
  std::vector<double> w0;

  double p_g = 0.0;
  Regularizer regularizer = Regularizer::LU;
  std::size_t alpha_tsvd = 0;
  double lu_condition_limit = 1e14;

  TruthFluxSpec truth;

  // benchmark sweep axes
  std::vector<MeshSpec> sweep_meshes;
  std::vector<double> sweep_dts;
  std::vector<double> sweep_p_gs{0.0};
  std::vector<TimeBasis> sweep_bases{TimeBasis::Constant};
  std::vector<Regularizer> sweep_regularizers{Regularizer::LU};
  std::vector<double> sweep_omegas{0.0};
  int noise_samples = 1;
  MeshSpec generation_mesh;
  double generation_dt = 0.0;
  bool same_grid_generation = false;

  // selection ladder and search controls
  DiscretizationLadder ladder;
  SelectionOptions selection;

  StepperOptions stepper;

  std::string out_dir = ".";
  bool write_vtk = false;
  std::string cache_dir;
  std::string measurements_path;
  std::uint64_t seed = 0;
  int threads = 1;

  RunConfig();

  SensorArray sensors() const;
  InverseOptions inverse_options() const;
};

RunConfig parse_config_json(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Canonical digest of the fields that shape numeric output.
std::string config_fingerprint(const RunConfig& config);

}  // namespace moldflux
