#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "moldflux/benchmark_cases.hpp"
#include "moldflux/csv.hpp"
#include "moldflux/errors.hpp"
#include "moldflux/selection.hpp"

using namespace moldflux;

namespace {

const Geometry kSlab{2.0, 0.1, 1.2};
const double kInf = std::numeric_limits<double>::infinity();

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

DiscretizationLadder mock_ladder() {
  DiscretizationLadder l;
  l.meshes = {standard_mesh("mesh4"), standard_mesh("mesh5")};
  l.dts = {0.1, 0.5};
  return l;
}

// Closed-form objective: m_S = base[config] + (log10(p_g) + 10)^2, with
// per-config constant trajectories that only agree once p_g >= stable_at.
struct MockEvaluator : SelectionEvaluator {
  std::vector<double> base;
  double stable_at = 0.0;
  std::size_t nd = 2;
  Field volumes{1.0};
  std::vector<EvalRequest> calls;

  const Field& coarse_volumes() override { return volumes; }

  EvalOutcome evaluate(const EvalRequest& rq) override {
    calls.push_back(rq);
    const std::size_t idx = rq.mesh_idx * nd + rq.dt_idx;
    EvalOutcome o;
    const double u = std::log10(rq.p_g);
    o.m_S = base[idx] + (u + 10.0) * (u + 10.0);
    if (rq.want_trajectory) {
      const double v = rq.p_g >= stable_at ? 0.0 : static_cast<double>(idx);
      o.coarse_trajectory = {Field{v}, Field{v}};
    }
    return o;
  }
};

}  // namespace

TEST_CASE("mean misfit: zeros, hand mean, divergence, empty input") {
  std::vector<IntervalDiagnostics> d(3);
  CHECK(compute_mS(d) == doctest::Approx(0.0));
  d[0].S1 = 1.0;
  d[1].S1 = 3.0;
  d[2].S1 = 2.0;
  CHECK(compute_mS(d) == doctest::Approx(2.0));
  d.resize(2);
  CHECK(compute_mS(d) == doctest::Approx(2.0));
  d[1].S1 = kInf;
  CHECK(std::isinf(compute_mS(d)));
  CHECK_THROWS_AS(compute_mS({}), InvalidArgument);
}

TEST_CASE("trajectory distance: identical, shifted, malformed") {
  const Field volumes{0.12, 0.12};
  std::vector<Field> a{{350.0, 351.0}, {352.0, 353.0}};
  std::vector<Field> b = a;
  CHECK(compute_deltaT({a, b}, volumes) == doctest::Approx(0.0));

  for (Field& f : b)
    for (double& v : f) v += 1.0;
  // constant 1 K difference: sqrt(total volume) * 1 K
  CHECK(compute_deltaT({a, b}, volumes) == doctest::Approx(std::sqrt(0.24)));

  CHECK_THROWS_AS(compute_deltaT({a}, volumes), InvalidArgument);

  std::vector<Field> shorter{{350.0, 351.0}};
  CHECK(std::isinf(compute_deltaT({a, shorter}, volumes)));
}

TEST_CASE("ladder validation and the stability threshold") {
  DiscretizationLadder l = mock_ladder();
  CHECK_NOTHROW(l.validate(kSlab));
  CHECK(l.num_configs() == 4u);
  CHECK(standard_mesh("mesh5").characteristic_size(kSlab) == doctest::Approx(0.12));
  CHECK(stability_threshold(kSlab, l) == doctest::Approx(0.12 + 0.5));

  DiscretizationLadder wrong = l;
  std::swap(wrong.meshes[0], wrong.meshes[1]);  // coarsest first
  CHECK_THROWS_AS(wrong.validate(kSlab), InvalidArgument);

  wrong = l;
  wrong.dts = {0.5, 0.1};
  CHECK_THROWS_AS(wrong.validate(kSlab), InvalidArgument);

  wrong = l;
  wrong.meshes[1].label = wrong.meshes[0].label;
  CHECK_THROWS_AS(wrong.validate(kSlab), InvalidArgument);
}

TEST_CASE("nelder-mead: quadratic bowl") {
  const auto f = [](double u) { return (u + 10.0) * (u + 10.0); };
  NmResult r = nelder_mead_min(f, -15.0);
  CHECK(std::abs(r.u_min + 10.0) < 0.2);
  CHECK(r.f_min < 0.05);
  CHECK_FALSE(r.on_boundary);
  CHECK(r.evals <= 50);
  CHECK(r.trace.size() == static_cast<std::size_t>(r.evals));
}

TEST_CASE("nelder-mead: monotone objectives stop at the box edge") {
  NmResult inc = nelder_mead_min([](double u) { return u; }, -13.0);
  CHECK(inc.u_min == doctest::Approx(-22.0));
  CHECK(inc.on_boundary);

  NmResult dec = nelder_mead_min([](double u) { return -u; }, -13.0);
  CHECK(dec.u_min == doctest::Approx(-4.0));
  CHECK(dec.on_boundary);
}

TEST_CASE("nelder-mead: constant objective keeps the start point") {
  NmResult r = nelder_mead_min([](double) { return 7.0; }, -12.0);
  CHECK(r.u_min == doctest::Approx(-12.0));
  CHECK(r.f_min == doctest::Approx(7.0));
}

TEST_CASE("nelder-mead: non-finite everywhere fails loudly") {
  CHECK_THROWS_AS(nelder_mead_min([](double) { return kInf; }, -10.0), OptimizationFailure);
}

TEST_CASE("selection: stable ladder picks the misfit argmin and refines p_g") {
  MockEvaluator ev;
  ev.base = {5.0, 4.0, 3.0, 1.0};  // config (mesh 1, dt 1) wins
  ev.stable_at = 0.0;
  DiscretizationLadder l = mock_ladder();

  SelectionResult r = select_discretization(kSlab, l, ev);
  CHECK(r.mesh_idx == 1u);
  CHECK(r.dt_idx == 1u);
  CHECK(std::abs(std::log10(r.p_g) + 10.0) < 0.5);
  CHECK(r.m_S == doctest::Approx(1.0).epsilon(0.3));
  REQUIRE(r.stability.size() == 1u);
  CHECK(r.stability[0].passed);
  CHECK(r.total_evals == ev.calls.size());

  // iteration 0 logs all configs once, exactly one picked per iteration
  int iter0 = 0, picked = 0;
  for (const TraceRow& row : r.trace) {
    if (row.iteration == 0) ++iter0;
    if (row.picked) ++picked;
  }
  CHECK(iter0 == 4);
  CHECK(picked == static_cast<int>(r.trace.size() / 4));

  // identical rerun reproduces the trace
  MockEvaluator ev2;
  ev2.base = ev.base;
  ev2.stable_at = 0.0;
  SelectionResult r2 = select_discretization(kSlab, l, ev2);
  CHECK(r2.p_g == r.p_g);
  CHECK(r2.mesh_idx == r.mesh_idx);
  REQUIRE(r2.trace.size() == r.trace.size());
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    CHECK(r2.trace[i].m_S == r.trace[i].m_S);
    CHECK(r2.trace[i].picked == r.trace[i].picked);
  }
}

TEST_CASE("selection: the penalty climbs tenfold until the ladder stabilizes") {
  MockEvaluator ev;
  ev.base = {5.0, 4.0, 3.0, 1.0};
  ev.stable_at = 1e-20;
  SelectionResult r = select_discretization(kSlab, mock_ladder(), ev);

  REQUIRE(r.stability.size() == 3u);
  CHECK(r.stability[0].p_g == doctest::Approx(1e-22));
  CHECK_FALSE(r.stability[0].passed);
  CHECK(r.stability[1].p_g == doctest::Approx(1e-21));
  CHECK_FALSE(r.stability[1].passed);
  CHECK(r.stability[2].p_g == doctest::Approx(1e-20));
  CHECK(r.stability[2].passed);
  for (std::size_t i = 1; i < r.stability.size(); ++i) {
    CHECK(r.stability[i].p_g > r.stability[i - 1].p_g);  // never decreases
  }
  CHECK(r.mesh_idx == 1u);
  CHECK(r.dt_idx == 1u);
}

TEST_CASE("selection: a ladder that never stabilizes is an optimization failure") {
  MockEvaluator ev;
  ev.base = {5.0, 4.0, 3.0, 1.0};
  ev.stable_at = kInf;
  CHECK_THROWS_AS(select_discretization(kSlab, mock_ladder(), ev), OptimizationFailure);
}

TEST_CASE("selection: every config diverging is an optimization failure") {
  MockEvaluator ev;
  ev.base = {kInf, kInf, kInf, kInf};
  ev.stable_at = 0.0;
  CHECK_THROWS_AS(select_discretization(kSlab, mock_ladder(), ev), OptimizationFailure);
}

TEST_CASE("selection: single-entry ladder skips the comparison and tunes p_g") {
  MockEvaluator ev;
  ev.base = {2.0};
  ev.nd = 1;
  ev.stable_at = kInf;  // irrelevant: nothing to compare against
  DiscretizationLadder l;
  l.meshes = {standard_mesh("mesh5")};
  l.dts = {0.5};
  SelectionResult r = select_discretization(kSlab, l, ev);
  CHECK(r.mesh_idx == 0u);
  CHECK(r.dt_idx == 0u);
  CHECK(std::abs(std::log10(r.p_g) + 10.0) < 0.5);
  REQUIRE(r.stability.size() == 1u);
  CHECK(r.stability[0].passed);
}

TEST_CASE("selection trace file mirrors the iteration table") {
  MockEvaluator ev;
  ev.base = {5.0, 4.0, 3.0, 1.0};
  ev.stable_at = 0.0;
  SelectionResult r = select_discretization(kSlab, mock_ladder(), ev);

  const std::string path =
      (std::filesystem::temp_directory_path() / "moldflux_trace_test.csv").string();
  write_selection_trace(path, r, {"trace test"});
  CsvTable t = read_csv(path);
  CHECK(t.columns == std::vector<std::string>{"iteration", "mesh", "dt_s", "p_g", "m_S", "picked"});
  REQUIRE(t.rows.size() == r.trace.size());
  CHECK(t.rows[0][1] == r.trace[0].mesh_label);
  std::remove(path.c_str());
}

TEST_CASE("ladder evaluator inverts real data on every rung") {
  DiscretizationLadder l;
  l.meshes = {MeshSpec{"fine", 10, 2, 6}, MeshSpec{"coarse", 6, 2, 4}};
  l.dts = {0.5};
  PhysicalParams params = table_params();
  SensorArray sensors = make_sensor_grid(kSlab, 2, 2, 0.025);
  TimeGrid grid{3.0, 0.5, 1.0};

  Mesh gen_mesh = l.meshes[0].build(kSlab);
  const FluxFn g = truth_flux(default_truth_spec(1));
  MeasurementSeries meas =
      synthesize_measurements(gen_mesh, params, grid, g, sensors, StepperOptions{1e-12, -1});

  LadderEvaluatorConfig cfg;
  cfg.geometry = kSlab;
  cfg.params = params;
  cfg.t_f = grid.t_f;
  cfg.f_samp = grid.f_samp;
  cfg.sensors = sensors;
  LadderEvaluator ev(cfg, l, meas);

  EvalOutcome fine = ev.evaluate({0, 0, 1e-12, true});
  EvalOutcome coarse = ev.evaluate({1, 0, 1e-12, true});
  CHECK(std::isfinite(fine.m_S));
  CHECK(std::isfinite(coarse.m_S));
  CHECK(fine.m_S > 0.0);
  REQUIRE(fine.coarse_trajectory.size() == 3u);
  REQUIRE(coarse.coarse_trajectory.size() == 3u);
  const std::size_t coarse_cells = 6u * 2u * 4u;
  CHECK(fine.coarse_trajectory[0].size() == coarse_cells);
  CHECK(ev.coarse_volumes().size() == coarse_cells);

  // cached replay is bitwise identical
  EvalOutcome again = ev.evaluate({0, 0, 1e-12, true});
  CHECK(again.m_S == fine.m_S);
  REQUIRE(again.coarse_trajectory.size() == fine.coarse_trajectory.size());
  CHECK(again.coarse_trajectory[2] == fine.coarse_trajectory[2]);
}
