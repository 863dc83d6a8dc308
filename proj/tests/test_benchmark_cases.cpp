#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "moldflux/benchmark_cases.hpp"
#include "moldflux/csv.hpp"
#include "moldflux/errors.hpp"

using namespace moldflux;

namespace {

const Geometry kSlab{2.0, 0.1, 1.2};

PhysicalParams table_params() {
  PhysicalParams p;
  p.k_s = 383.0;
  p.rho = 8940.0;
  p.c_p = 390.0;
  p.h = 5.66e4;
  p.T_f = 350.0;
  p.T_0 = 350.0;
  return p;
}

}  // namespace

TEST_CASE("truth fluxes reproduce hand-computed reference values") {
  const FluxFn g1 = truth_flux(default_truth_spec(1));
  // -k_s * (1 + t/2) * (b z^2 + c) at z = 0
  CHECK(g1({0.5, 0.0, 0.0}, 0.0) == doctest::Approx(-1.149e6).epsilon(1e-12));
  CHECK(g1({0.5, 0.0, 0.0}, 2.0) == doctest::Approx(-2.298e6).epsilon(1e-12));
  // x does not enter case 1
  CHECK(g1({1.7, 0.0, 0.3}, 1.0) == g1({0.1, 0.0, 0.3}, 1.0));

  const FluxFn g2 = truth_flux(default_truth_spec(2));
  // sweep term vanishes at t = 0, bump peaks at (x, z) = (1, 0)
  CHECK(g2({1.0, 0.0, 0.0}, 0.0) == doctest::Approx(-1.2639e7).epsilon(1e-12));

  // both cases heat the face (negative flux) over the whole horizon
  for (double t : {0.0, 10.0, 25.0, 50.0}) {
    for (double x : {0.1, 1.0, 1.9}) {
      for (double z : {0.0, 0.6, 1.2}) {
        CHECK(g1({x, 0.0, z}, t) < 0.0);
        CHECK(g2({x, 0.0, z}, t) < 0.0);
      }
    }
  }
}

TEST_CASE("truth spec validation") {
  CHECK_THROWS_AS(default_truth_spec(3), InvalidArgument);
  TruthFluxSpec bad = default_truth_spec(2);
  bad.t_f = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = default_truth_spec(1);
  bad.k_s = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("standard mesh ladder: labels, counts, ordering") {
  const std::vector<MeshSpec> meshes = standard_meshes();
  REQUIRE(meshes.size() == 5u);
  const std::vector<std::string> labels{"mesh1", "mesh2", "mesh3", "mesh4", "mesh5"};
  const std::vector<std::int64_t> nxs{230, 130, 90, 50, 30};
  const std::vector<std::int64_t> nzs{150, 70, 50, 30, 10};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(meshes[i].label == labels[i]);
    CHECK(meshes[i].nx == nxs[i]);
    CHECK(meshes[i].ny == 5);
    CHECK(meshes[i].nz == nzs[i]);
    if (i > 0) {
      // mesh1 and mesh2 tie at dy = 0.02, so the ordering is non-strict
      CHECK(meshes[i].characteristic_size(kSlab) >= meshes[i - 1].characteristic_size(kSlab));
    }
  }
  CHECK(standard_mesh("mesh3").nx == 90);
  CHECK_THROWS_AS(standard_mesh("mesh6"), InvalidArgument);
}

TEST_CASE("every standard mesh centers the sensor grid in x and z") {
  const SensorArray sensors = standard_sensor_grid(kSlab);
  REQUIRE(sensors.size() == 100u);
  CHECK(sensors.points.front().x == doctest::Approx(0.1));
  CHECK(sensors.points.front().y == doctest::Approx(0.02));
  CHECK(sensors.points.front().z == doctest::Approx(0.06));
  CHECK(sensors.points.back().x == doctest::Approx(1.9));
  CHECK(sensors.points.back().z == doctest::Approx(1.14));

  for (const MeshSpec& spec : standard_meshes()) {
    const Mesh mesh = spec.build(kSlab);
    for (const Vec3& s : sensors.points) {
      const std::int64_t c = locate_cell(mesh, s);
      const Vec3 center = mesh.cell_centers[static_cast<std::size_t>(c)];
      CHECK(center.x == doctest::Approx(s.x).epsilon(1e-12));
      CHECK(center.z == doctest::Approx(s.z).epsilon(1e-12));
      // y = 0.02 sits on a grid plane; ties resolve to the near-face cell
      CHECK(center.y == doctest::Approx(0.01).epsilon(1e-12));
    }
  }
}

TEST_CASE("synthesized measurements: equilibrium, heating, determinism") {
  const Mesh mesh = build_structured_mesh(kSlab, 8, 3, 6);
  const PhysicalParams params = table_params();
  const SensorArray sensors = make_sensor_grid(kSlab, 2, 2, 0.025);
  const TimeGrid grid{2.0, 0.5, 1.0};

  const FluxFn zero = [](const Vec3&, double) { return 0.0; };
  MeasurementSeries quiet = synthesize_measurements(mesh, params, grid, zero, sensors);
  REQUIRE(quiet.readings.size() == 2u);
  for (const std::vector<double>& row : quiet.readings) {
    REQUIRE(row.size() == 4u);
    for (double v : row) CHECK(v == doctest::Approx(350.0).epsilon(1e-10));
  }
  CHECK(quiet.times == std::vector<double>{1.0, 2.0});

  const FluxFn g1 = truth_flux(default_truth_spec(1));
  MeasurementSeries heated = synthesize_measurements(mesh, params, grid, g1, sensors);
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(heated.readings[0][s] > 350.0);
    CHECK(heated.readings[1][s] > heated.readings[0][s]);
  }

  MeasurementSeries again = synthesize_measurements(mesh, params, grid, g1, sensors);
  CHECK(again.readings == heated.readings);
}

TEST_CASE("error report: exact, absent, and scaled reconstructions") {
  const Mesh mesh = build_structured_mesh(kSlab, 10, 2, 6);
  const SensorArray sensors = make_sensor_grid(kSlab, 2, 2, 0.025);
  const RbfBasis basis = make_rbf_basis(sensors, kSlab, default_eta(sensors, kSlab));

  WeightsTimeline truth;
  truth.time_basis = TimeBasis::Constant;
  truth.f_samp = 1.0;
  truth.w = {{1e5, 2e5, 1.5e5, 5e4}, {1.2e5, 1.8e5, 1.4e5, 6e4}};
  const FluxFn g_tr = [&](const Vec3& p, double t) { return eval_flux(basis, truth, p, t); };

  ErrorReport exact = error_report(g_tr, basis, truth, mesh);
  REQUIRE(exact.times.size() == 2u);
  CHECK(exact.max_l2 == doctest::Approx(0.0));
  CHECK(exact.max_linf == doctest::Approx(0.0));

  WeightsTimeline silent = truth;
  for (auto& w : silent.w) w.assign(w.size(), 0.0);
  ErrorReport absent = error_report(g_tr, basis, silent, mesh);
  CHECK(absent.mean_l2 == doctest::Approx(1.0));
  CHECK(absent.max_l2 == doctest::Approx(1.0));
  CHECK(absent.max_linf == doctest::Approx(1.0));

  WeightsTimeline scaled = truth;
  for (auto& w : scaled.w)
    for (double& v : w) v *= 1.1;
  ErrorReport off = error_report(g_tr, basis, scaled, mesh);
  CHECK(off.max_linf == doctest::Approx(0.1));
  CHECK(off.max_l2 == doctest::Approx(0.1));

  const FluxFn vanishing = [](const Vec3&, double) { return 0.0; };
  CHECK_THROWS_AS(error_report(vanishing, basis, truth, mesh), InvalidArgument);
}

TEST_CASE("sweep: tiny same-grid run and csv round trip") {
  SweepSpec spec;
  spec.geometry = kSlab;
  spec.params = table_params();
  spec.t_f = 2.0;
  spec.f_samp = 1.0;
  spec.sensors = make_sensor_grid(kSlab, 2, 2, 0.025);
  spec.truth = default_truth_spec(1);
  spec.meshes = {MeshSpec{"m8", 8, 2, 6}};
  spec.dts = {0.5};
  spec.p_gs = {0.0, 1e-10};
  spec.stepper.tol_lin = 1e-13;

  const std::vector<SweepRow> rows = run_sweep(spec);
  REQUIRE(rows.size() == 2u);
  for (const SweepRow& row : rows) {
    CHECK(row.mesh_label == "m8");
    CHECK(row.dt == doctest::Approx(0.5));
    CHECK(row.samples == 1);
    CHECK_FALSE(row.diverged);
    CHECK(std::isfinite(row.mean_l2));
    CHECK(row.wall_ms_per_iter > 0.0);
  }
  // Four sensors cannot represent the quadratic truth, so the flux error is
  // representation limited; the data misfit itself is near zero because B is
  // square on the generating grid.
  CHECK(rows[0].p_g == doctest::Approx(0.0));
  CHECK(rows[0].mean_S1 < 1e-8);
  CHECK(rows[0].max_l2 < 10.0);

  const std::vector<SweepRow> rerun = run_sweep(spec);
  REQUIRE(rerun.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rerun[i].mean_l2 == rows[i].mean_l2);
    CHECK(rerun[i].mean_S1 == rows[i].mean_S1);
  }

  const std::string path =
      (std::filesystem::temp_directory_path() / "moldflux_sweep_test.csv").string();
  write_sweep_csv(path, rows, {"sweep test"});
  CsvTable t = read_csv(path);
  CHECK(t.columns == std::vector<std::string>{"mesh", "dt_s", "p_g", "time_basis", "regularizer",
                                              "omega_K", "samples", "mean_l2", "max_l2",
                                              "mean_linf", "max_linf", "mean_S1",
                                              "wall_ms_per_iter", "diverged"});
  REQUIRE(t.rows.size() == 2u);
  CHECK(t.rows[0][0] == "m8");
  CHECK(std::stod(t.rows[1][2]) == doctest::Approx(1e-10));
  std::remove(path.c_str());
}
