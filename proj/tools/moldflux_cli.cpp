#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "moldflux/config.hpp"
#include "moldflux/csv.hpp"
#include "moldflux/fingerprint.hpp"
#include "moldflux/version.hpp"
#include "moldflux/vtk.hpp"

namespace {

using namespace moldflux;

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::vector<std::string> file_comments(const RunConfig& cfg, const Mesh* mesh = nullptr) {
  std::vector<std::string> c;
  c.push_back(std::string(kToolName) + " " + kVersion);
  c.push_back("config_fingerprint " + config_fingerprint(cfg));
  if (mesh) c.push_back(mesh_metadata(*mesh));
  return c;
}

double resolved_eta(const RunConfig& cfg, const SensorArray& sensors) {
  return cfg.eta > 0.0 ? cfg.eta : default_eta(sensors, cfg.geometry);
}

int run_direct(const RunConfig& cfg) {
  const Mesh mesh = cfg.mesh.build(cfg.geometry);
  const SensorArray sensors = cfg.sensors();
  const FluxFn g = truth_flux(cfg.truth);
  const MeasurementSeries series =
      synthesize_measurements(mesh, cfg.params, cfg.grid, g, sensors, cfg.stepper);
  write_measurement_csv(out_path(cfg, "measurements.csv"), series, file_comments(cfg, &mesh));

  DirectOptions options;
  options.stepper = cfg.stepper;
  const std::vector<std::int64_t> probes = probe_cells_for(mesh, sensors);
  const DirectResult direct = solve_direct(mesh, cfg.params, cfg.grid, g, probes, options);
  const Field& final_field = direct.trajectory.fields.back();
  write_field_csv(out_path(cfg, "final_field.csv"), mesh, final_field, "T_K",
                  file_comments(cfg, &mesh));
  if (cfg.write_vtk) {
    write_vtk_field(out_path(cfg, "final_field.vtk"), mesh, final_field, "temperature");
  }
  std::printf("direct: %lld cells, %lld steps, %zu measurement rows -> %s\n",
              static_cast<long long>(mesh.num_cells()),
              static_cast<long long>(cfg.grid.num_steps()), series.readings.size(),
              cfg.out_dir.c_str());
  return 0;
}

int run_offline(const RunConfig& cfg) {
  const Mesh mesh = cfg.mesh.build(cfg.geometry);
  const SensorArray sensors = cfg.sensors();
  const RbfBasis basis = make_rbf_basis(sensors, cfg.geometry, resolved_eta(cfg, sensors));
  OfflineOptions options;
  options.stepper = cfg.stepper;
  options.threads = cfg.threads;
  const std::string cache = cfg.cache_dir.empty() ? cfg.out_dir : cfg.cache_dir;
  const OfflineData data =
      get_or_build_offline(cache, mesh, cfg.params, cfg.grid, basis, sensors, options);
  std::printf("offline: %zu basis responses on %lld cells, fingerprint %s, cached in %s\n",
              data.P, static_cast<long long>(data.n_cells), data.fingerprint.c_str(),
              cache.c_str());
  return 0;
}

int run_invert(const RunConfig& cfg) {
  if (cfg.measurements_path.empty()) {
    throw ConfigError("invert: no measurements file (set paths.measurements or --measurements)");
  }
  const Mesh mesh = cfg.mesh.build(cfg.geometry);
  const SensorArray sensors = cfg.sensors();
  const MeasurementSeries series =
      read_measurement_csv(cfg.measurements_path, sensors, cfg.grid.f_samp);

  const RbfBasis basis = make_rbf_basis(sensors, cfg.geometry, resolved_eta(cfg, sensors));
  OfflineOptions offline_options;
  offline_options.stepper = cfg.stepper;
  offline_options.threads = cfg.threads;
  const OfflineData offline = get_or_build_offline(cfg.cache_dir, mesh, cfg.params, cfg.grid,
                                                   basis, sensors, offline_options);

  const InverseOptions options = cfg.inverse_options();
  const InverseSolution sol =
      run_sequential_inversion(mesh, cfg.params, cfg.grid, offline, series, options);

  {
    std::vector<std::string> columns{"k", "tau_s"};
    for (std::size_t i = 1; i <= offline.P; ++i) columns.push_back("w_" + std::to_string(i));
    CsvWriter csv(out_path(cfg, "weights.csv"), file_comments(cfg, &mesh), columns);
    for (std::size_t k = 0; k < sol.timeline.w.size(); ++k) {
      csv.begin_row();
      csv.add(static_cast<long long>(k + 1));
      csv.add(sol.timeline.f_samp > 0 ? static_cast<double>(k + 1) / sol.timeline.f_samp : 0.0);
      for (double w : sol.timeline.w[k]) csv.add(w);
      csv.end_row();
    }
  }
  {
    std::vector<std::string> comments = file_comments(cfg, &mesh);
    comments.push_back("regularizer " + std::string(regularizer_name(options.regularizer)));
    if (options.regularizer == Regularizer::LU) {
      comments.push_back("condition_estimate " + format_full(sol.condition_estimate));
    } else {
      comments.push_back("alpha_used " + std::to_string(sol.alpha_used));
    }
    if (sol.diverged) comments.push_back("diverged 1");
    CsvWriter csv(out_path(cfg, "diagnostics.csv"), comments,
                  {"k", "S1", "S2", "residual_norm", "wall_ms"});
    for (std::size_t k = 0; k < sol.diagnostics.size(); ++k) {
      const IntervalDiagnostics& d = sol.diagnostics[k];
      csv.begin_row();
      csv.add(static_cast<long long>(k + 1));
      csv.add(d.S1);
      csv.add(d.S2);
      csv.add(d.residual_norm);
      csv.add(d.wall_ms);
      csv.end_row();
    }
  }
  if (options.regularizer == Regularizer::TSVD) {
    CsvWriter csv(out_path(cfg, "sigma.csv"), file_comments(cfg, &mesh), {"i", "sigma"});
    for (std::size_t i = 0; i < sol.sigma.size(); ++i) {
      csv.begin_row();
      csv.add(static_cast<long long>(i + 1));
      csv.add(sol.sigma[i]);
      csv.end_row();
    }
  }
  {
    // Reconstructed flux at the hot-face centers, one row per face and instant.
    const HotFaceTable hot = hot_face_table(mesh);
    CsvWriter csv(out_path(cfg, "flux.csv"), file_comments(cfg, &mesh),
                  {"k", "tau_s", "face", "x_m", "z_m", "g_W_per_m2"});
    for (std::size_t k = 1; k <= sol.timeline.w.size(); ++k) {
      const double t = static_cast<double>(k) / sol.timeline.f_samp;
      for (std::size_t f = 0; f < hot.size(); ++f) {
        csv.begin_row();
        csv.add(static_cast<long long>(k));
        csv.add(t);
        csv.add(static_cast<long long>(f));
        csv.add(hot.center[f].x);
        csv.add(hot.center[f].z);
        csv.add(eval_flux(offline.basis(), sol.timeline, hot.center[f], t));
        csv.end_row();
      }
    }
  }
  write_field_csv(out_path(cfg, "final_field.csv"), mesh, sol.final_field, "T_K",
                  file_comments(cfg, &mesh));
  if (cfg.write_vtk) {
    write_vtk_field(out_path(cfg, "final_field.vtk"), mesh, sol.final_field, "temperature");
  }
  std::printf("invert: %zu intervals, mean S1 %.6g, %s%s\n", sol.completed_intervals,
              compute_mS(sol.diagnostics), sol.diverged ? "diverged, " : "",
              cfg.out_dir.c_str());
  return sol.diverged ? 3 : 0;
}

int run_benchmark(const RunConfig& cfg) {
  SweepSpec spec;
  spec.geometry = cfg.geometry;
  spec.params = cfg.params;
  spec.t_f = cfg.grid.t_f;
  spec.f_samp = cfg.grid.f_samp;
  spec.sensors = cfg.sensors();
  spec.eta = cfg.eta;
  spec.truth = cfg.truth;
  spec.meshes = cfg.sweep_meshes;
  spec.dts = cfg.sweep_dts;
  spec.p_gs = cfg.sweep_p_gs;
  spec.bases = cfg.sweep_bases;
  spec.regularizers = cfg.sweep_regularizers;
  spec.alpha_tsvd = cfg.alpha_tsvd;
  spec.omegas = cfg.sweep_omegas;
  spec.noise_samples = cfg.noise_samples;
  spec.seed = cfg.seed;
  spec.generation_mesh = cfg.generation_mesh;
  spec.generation_dt = cfg.generation_dt;
  spec.same_grid_generation = cfg.same_grid_generation;
  spec.stepper = cfg.stepper;
  spec.cache_dir = cfg.cache_dir;
  spec.threads = cfg.threads;

  const std::vector<SweepRow> rows = run_sweep(spec);
  write_sweep_csv(out_path(cfg, "results.csv"), rows, file_comments(cfg));

  if (!spec.same_grid_generation) {
    // Persist the shared input data alongside the results.
    MeshSpec gen = spec.generation_mesh;
    if (gen.label.empty()) {
      gen = spec.meshes.front();
      double best = gen.characteristic_size(spec.geometry);
      for (const MeshSpec& m : spec.meshes) {
        const double cs = m.characteristic_size(spec.geometry);
        if (cs < best) {
          best = cs;
          gen = m;
        }
      }
    }
    double gdt = spec.generation_dt;
    if (gdt <= 0.0) gdt = *std::min_element(spec.dts.begin(), spec.dts.end());
    const Mesh gen_mesh = gen.build(spec.geometry);
    const TimeGrid gen_grid{spec.t_f, gdt, spec.f_samp};
    const MeasurementSeries series = synthesize_measurements(
        gen_mesh, spec.params, gen_grid, truth_flux(spec.truth), spec.sensors, spec.stepper);
    write_measurement_csv(out_path(cfg, "measurements.csv"), series,
                          file_comments(cfg, &gen_mesh));
  }
  std::printf("benchmark: %zu sweep rows -> %s\n", rows.size(), cfg.out_dir.c_str());
  return 0;
}

int run_select(const RunConfig& cfg) {
  LadderEvaluatorConfig ev;
  ev.geometry = cfg.geometry;
  ev.params = cfg.params;
  ev.t_f = cfg.grid.t_f;
  ev.f_samp = cfg.grid.f_samp;
  ev.sensors = cfg.sensors();
  ev.eta = cfg.eta;
  ev.time_basis = cfg.time_basis;
  ev.regularizer = cfg.regularizer;
  ev.alpha_tsvd = cfg.alpha_tsvd;
  ev.stepper = cfg.stepper;
  ev.cache_dir = cfg.cache_dir;
  ev.threads = cfg.threads;

  MeasurementSeries series;
  if (!cfg.measurements_path.empty()) {
    series = read_measurement_csv(cfg.measurements_path, ev.sensors, ev.f_samp);
  } else {
    MeshSpec gen = cfg.generation_mesh;
    if (gen.label.empty()) gen = cfg.ladder.meshes.front();
    double gdt = cfg.generation_dt;
    if (gdt <= 0.0) gdt = *std::min_element(cfg.ladder.dts.begin(), cfg.ladder.dts.end());
    const Mesh gen_mesh = gen.build(cfg.geometry);
    const TimeGrid gen_grid{ev.t_f, gdt, ev.f_samp};
    series = synthesize_measurements(gen_mesh, cfg.params, gen_grid, truth_flux(cfg.truth),
                                     ev.sensors, cfg.stepper);
  }

  LadderEvaluator evaluator(ev, cfg.ladder, series);
  const SelectionResult result =
      select_discretization(cfg.geometry, cfg.ladder, evaluator, cfg.selection);
  write_selection_trace(out_path(cfg, "trace.csv"), result, file_comments(cfg));
  std::printf("select: mesh %s, dt %.6g s, p_g %.6g, m_S %.6g (%zu evaluator calls) -> %s\n",
              cfg.ladder.meshes[result.mesh_idx].label.c_str(), cfg.ladder.dts[result.dt_idx],
              result.p_g, result.m_S, result.total_evals, cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient hot-face heat flux estimation from interior temperature probes"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir, measurements_path;
  int threads = 0;
  long long seed = -1;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file");
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--threads", threads, "worker threads (overrides config)");
    cmd->add_option("--seed", seed, "base RNG seed (overrides config)");
  };

  CLI::App* cmd_direct =
      app.add_subcommand("direct", "forward solve: synthesize probe data for the truth flux");
  CLI::App* cmd_offline =
      app.add_subcommand("offline", "precompute and cache the basis response data");
  CLI::App* cmd_invert =
      app.add_subcommand("invert", "estimate the hot-face flux from a measurement file");
  CLI::App* cmd_benchmark =
      app.add_subcommand("benchmark", "run an experiment sweep and write the results table");
  CLI::App* cmd_select =
      app.add_subcommand("select", "search mesh, time step, and penalty automatically");
  for (CLI::App* c : {cmd_direct, cmd_offline, cmd_invert, cmd_benchmark, cmd_select}) {
    add_common(c);
  }
  cmd_invert->add_option("--measurements", measurements_path,
                         "measurement CSV (overrides config)");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : parse_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads > 0) cfg.threads = threads;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (!measurements_path.empty()) cfg.measurements_path = measurements_path;
    std::filesystem::create_directories(cfg.out_dir);
    if (!cfg.cache_dir.empty()) std::filesystem::create_directories(cfg.cache_dir);

    if (cmd_direct->parsed()) return run_direct(cfg);
    if (cmd_offline->parsed()) return run_offline(cfg);
    if (cmd_invert->parsed()) return run_invert(cfg);
    if (cmd_benchmark->parsed()) return run_benchmark(cfg);
    if (cmd_select->parsed()) return run_select(cfg);
    std::cerr << "no command given\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const OptimizationFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
