#include "moldflux/benchmark_cases.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "moldflux/csv.hpp"

namespace moldflux {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void TruthFluxSpec::validate() const {
  if (id != 1 && id != 2) throw InvalidArgument("TruthFluxSpec: id must be 1 or 2");
  if (!(k_s > 0.0)) throw InvalidArgument("TruthFluxSpec: k_s must be positive");
  if (id == 2 && !(t_f > 0.0)) throw InvalidArgument("TruthFluxSpec: t_f must be positive");
}

TruthFluxSpec default_truth_spec(int id) {
  TruthFluxSpec spec;
  spec.id = id;
  spec.validate();
  return spec;
}

FluxFn truth_flux(const TruthFluxSpec& spec) {
  spec.validate();
  if (spec.id == 1) {
    return [spec](const Vec3& p, double t) {
      const double g1 = spec.b * p.z * p.z + spec.c;
      return -spec.k_s * (1.0 + 0.5 * t) * g1;
    };
  }
  return [spec](const Vec3& p, double t) {
    const double g1 = spec.b * p.z * p.z + spec.c;
    const double dx = p.x - 1.0;
    const double g2 = 10.0 * spec.c / (1.0 + dx * dx + p.z * p.z);
    const double sweep = std::sin(2.0 * std::numbers::pi * spec.f_max * t * t / spec.t_f);
    return -spec.k_s * (g1 + 0.5 * g1 * sweep + g2 * std::exp(-0.1 * t));
  };
}

std::vector<MeshSpec> standard_meshes() {
  return {
      {"mesh1", 230, 5, 150},
      {"mesh2", 130, 5, 70},
      {"mesh3", 90, 5, 50},
      {"mesh4", 50, 5, 30},
      {"mesh5", 30, 5, 10},
  };
}

MeshSpec standard_mesh(const std::string& label) {
  for (const MeshSpec& m : standard_meshes()) {
    if (m.label == label) return m;
  }
  throw InvalidArgument("standard_mesh: unknown label " + label);
}

SensorArray standard_sensor_grid(const Geometry& g) {
  return make_sensor_grid(g, 10, 10, 0.02);
}

MeasurementSeries synthesize_measurements(const Mesh& mesh, const PhysicalParams& params,
                                          const TimeGrid& grid, const FluxFn& g,
                                          const SensorArray& sensors,
                                          const StepperOptions& stepper) {
  sensors.validate(mesh.geometry);
  const std::vector<std::int64_t> probes = probe_cells_for(mesh, sensors);
  DirectOptions options;
  options.stepper = stepper;
  const DirectResult direct = solve_direct(mesh, params, grid, g, probes, options);

  MeasurementSeries series;
  series.sensors = sensors;
  series.f_samp = grid.f_samp;
  series.times = direct.sample_times;
  series.readings = direct.probe_samples;
  series.validate();
  return series;
}

ErrorReport error_report(const FluxFn& g_tr, const RbfBasis& basis,
                         const WeightsTimeline& timeline, const Mesh& mesh) {
  const HotFaceTable hot = hot_face_table(mesh);
  if (hot.cell.empty()) throw InvalidState("error_report: mesh has no hot-face cells");

  ErrorReport report;
  const std::size_t num_k = timeline.num_intervals();
  report.times.reserve(num_k);
  report.l2.reserve(num_k);
  report.linf.reserve(num_k);

  double area_total = 0.0;
  for (double a : hot.area) area_total += a;

  double sum_l2 = 0.0, sum_linf = 0.0;
  for (std::size_t k = 1; k <= num_k; ++k) {
    const double t = static_cast<double>(k) / timeline.f_samp;
    double acc = 0.0, worst = 0.0;
    for (std::size_t f = 0; f < hot.center.size(); ++f) {
      const double gt = g_tr(hot.center[f], t);
      if (gt == 0.0) throw InvalidArgument("error_report: true flux vanishes on the hot face");
      const double gc = eval_flux(basis, timeline, hot.center[f], t);
      const double e = (gt - gc) / gt;
      acc += e * e * hot.area[f];
      worst = std::max(worst, std::abs(e));
    }
    const double l2 = std::sqrt(acc / area_total);
    report.times.push_back(t);
    report.l2.push_back(l2);
    report.linf.push_back(worst);
    sum_l2 += l2;
    sum_linf += worst;
    report.max_l2 = std::max(report.max_l2, l2);
    report.max_linf = std::max(report.max_linf, worst);
  }
  if (num_k > 0) {
    report.mean_l2 = sum_l2 / static_cast<double>(num_k);
    report.mean_linf = sum_linf / static_cast<double>(num_k);
  }
  return report;
}

namespace {

struct GenerationPlan {
  MeshSpec mesh;
  double dt = 0.0;
};

GenerationPlan resolve_generation(const SweepSpec& spec) {
  GenerationPlan plan;
  if (!spec.generation_mesh.label.empty()) {
    plan.mesh = spec.generation_mesh;
  } else {
    plan.mesh = spec.meshes.front();
    double best = plan.mesh.characteristic_size(spec.geometry);
    for (const MeshSpec& m : spec.meshes) {
      const double cs = m.characteristic_size(spec.geometry);
      if (cs < best) {
        best = cs;
        plan.mesh = m;
      }
    }
  }
  plan.dt = spec.generation_dt;
  if (plan.dt <= 0.0) {
    plan.dt = *std::min_element(spec.dts.begin(), spec.dts.end());
  }
  return plan;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.geometry.validate();
  spec.params.validate();
  spec.truth.validate();
  spec.sensors.validate(spec.geometry);
  if (spec.meshes.empty() || spec.dts.empty() || spec.p_gs.empty() || spec.bases.empty() ||
      spec.regularizers.empty() || spec.omegas.empty()) {
    throw InvalidArgument("run_sweep: empty sweep axis");
  }
  if (spec.noise_samples < 1) throw InvalidArgument("run_sweep: noise_samples must be >= 1");

  const double eta =
      spec.eta > 0.0 ? spec.eta : default_eta(spec.sensors, spec.geometry);
  const RbfBasis basis = make_rbf_basis(spec.sensors, spec.geometry, eta);
  const FluxFn g_tr = truth_flux(spec.truth);

  // Shared generation series for the default cross-grid mode.
  MeasurementSeries shared_clean;
  if (!spec.same_grid_generation) {
    const GenerationPlan plan = resolve_generation(spec);
    const Mesh gen_mesh = plan.mesh.build(spec.geometry);
    const TimeGrid gen_grid{spec.t_f, plan.dt, spec.f_samp};
    gen_grid.validate();
    shared_clean = synthesize_measurements(gen_mesh, spec.params, gen_grid, g_tr, spec.sensors,
                                           spec.stepper);
  }

  OfflineOptions offline_options;
  offline_options.stepper = spec.stepper;
  offline_options.threads = spec.threads;

  std::vector<SweepRow> rows;
  for (const MeshSpec& mesh_spec : spec.meshes) {
    const Mesh mesh = mesh_spec.build(spec.geometry);
    for (double dt : spec.dts) {
      const TimeGrid grid{spec.t_f, dt, spec.f_samp};
      grid.validate();
      const OfflineData offline = get_or_build_offline(spec.cache_dir, mesh, spec.params, grid,
                                                       basis, spec.sensors, offline_options);
      MeasurementSeries per_config_clean;
      const MeasurementSeries* clean_ptr = &shared_clean;
      if (spec.same_grid_generation) {
        per_config_clean =
            synthesize_measurements(mesh, spec.params, grid, g_tr, spec.sensors, spec.stepper);
        clean_ptr = &per_config_clean;
      }

      for (double p_g : spec.p_gs) {
        for (TimeBasis tb : spec.bases) {
          for (Regularizer reg : spec.regularizers) {
            for (std::size_t oi = 0; oi < spec.omegas.size(); ++oi) {
              const double omega = spec.omegas[oi];
              const int samples = omega > 0.0 ? spec.noise_samples : 1;

              SweepRow row;
              row.mesh_label = mesh_spec.label;
              row.dt = dt;
              row.p_g = p_g;
              row.time_basis = tb;
              row.regularizer = reg;
              row.omega = omega;
              row.samples = samples;

              double sum_mean_l2 = 0.0, sum_max_l2 = 0.0;
              double sum_mean_linf = 0.0, sum_max_linf = 0.0;
              double sum_S1 = 0.0, sum_wall = 0.0;
              for (int s = 0; s < samples; ++s) {
                MeasurementSeries data = *clean_ptr;
                if (omega > 0.0) {
                  NoiseSpec noise;
                  noise.omega = omega;
                  noise.seed = spec.seed;
                  // Stream keyed by (omega, sample) only, so every
                  // configuration sees identical noisy data.
                  noise.stream = oi * 1000003ull + static_cast<std::uint64_t>(s);
                  data = add_noise(data, noise);
                }

                InverseOptions opts;
                opts.time_basis = tb;
                opts.p_g = p_g;
                opts.regularizer = reg;
                opts.alpha_tsvd = spec.alpha_tsvd;
                opts.stepper = spec.stepper;
                try {
                  const InverseSolution sol = run_sequential_inversion(mesh, spec.params, grid,
                                                                       offline, data, opts);
                  const ErrorReport report = error_report(g_tr, basis, sol.timeline, mesh);
                  if (sol.diverged) row.diverged = true;
                  sum_mean_l2 += report.mean_l2;
                  sum_max_l2 += report.max_l2;
                  sum_mean_linf += report.mean_linf;
                  sum_max_linf += report.max_linf;
                  sum_S1 += compute_mS(sol.diagnostics);
                  sum_wall += sol.mean_wall_ms;
                } catch (const SolverError&) {
                  row.diverged = true;
                  sum_mean_l2 = kInf;
                  sum_max_l2 = kInf;
                  sum_mean_linf = kInf;
                  sum_max_linf = kInf;
                  sum_S1 = kInf;
                }
              }
              const double inv_n = 1.0 / static_cast<double>(samples);
              row.mean_l2 = sum_mean_l2 * inv_n;
              row.max_l2 = sum_max_l2 * inv_n;
              row.mean_linf = sum_mean_linf * inv_n;
              row.max_linf = sum_max_linf * inv_n;
              row.mean_S1 = sum_S1 * inv_n;
              row.wall_ms_per_iter = sum_wall * inv_n;
              rows.push_back(std::move(row));
            }
          }
        }
      }
    }
  }
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows,
                     const std::vector<std::string>& header_comments) {
  CsvWriter csv(path, header_comments,
                {"mesh", "dt_s", "p_g", "time_basis", "regularizer", "omega_K", "samples",
                 "mean_l2", "max_l2", "mean_linf", "max_linf", "mean_S1", "wall_ms_per_iter",
                 "diverged"});
  for (const SweepRow& row : rows) {
    csv.begin_row();
    csv.add(row.mesh_label);
    csv.add(row.dt);
    csv.add(row.p_g);
    csv.add(std::string(time_basis_name(row.time_basis)));
    csv.add(std::string(regularizer_name(row.regularizer)));
    csv.add(row.omega);
    csv.add(static_cast<long long>(row.samples));
    csv.add(row.mean_l2);
    csv.add(row.max_l2);
    csv.add(row.mean_linf);
    csv.add(row.max_linf);
    csv.add(row.mean_S1);
    csv.add(row.wall_ms_per_iter);
    csv.add(static_cast<long long>(row.diverged ? 1 : 0));
    csv.end_row();
  }
}

}  // namespace moldflux
