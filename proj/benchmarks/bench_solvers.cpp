// Microbenchmarks for the hot paths: one implicit Euler step per mesh size,
// the dense normal-equation solves, and a full online interval at desk scale.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>
#include <string>

#include "moldflux/benchmark_cases.hpp"
#include "moldflux/dense.hpp"
#include "moldflux/fvm.hpp"
#include "moldflux/offline.hpp"
#include "moldflux/online.hpp"
#include "moldflux/rbf.hpp"

namespace {

using namespace moldflux;

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

struct MeshFixture {
  Mesh mesh;
  DiscreteOperator op;
  std::unique_ptr<ImplicitEulerStepper> stepper;
  Field T;
};

MeshFixture& mesh_fixture(const std::string& label, double dt) {
  static std::map<std::string, MeshFixture> cache;
  const std::string key = label + "/" + std::to_string(dt);
  auto it = cache.find(key);
  if (it == cache.end()) {
    MeshFixture f;
    const MeshSpec spec = standard_mesh(label);
    Geometry g{2.0, 0.1, 1.2};
    f.mesh = spec.build(g);
    f.op = assemble_operators(f.mesh, table_params());
    f.stepper = std::make_unique<ImplicitEulerStepper>(f.op, dt, StepperOptions{});
    f.T.assign(static_cast<std::size_t>(f.mesh.num_cells()), table_params().T_0 + 25.0);
    it = cache.emplace(key, std::move(f)).first;
  }
  return it->second;
}

void BM_ImplicitEulerStep(benchmark::State& state, const std::string& label) {
  MeshFixture& f = mesh_fixture(label, 0.5);
  for (auto _ : state) {
    f.stepper->step_robin_only(f.T);
    benchmark::DoNotOptimize(f.T.data());
  }
  state.SetItemsProcessed(state.iterations() * f.mesh.num_cells());
}

void BM_LuSolve(benchmark::State& state) {
  const int P = 100;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix B(P, P);
  for (double& v : B.data) v = u(rng);
  DenseMatrix K = matmul_at_b(B, B);
  for (int i = 0; i < P; ++i) K.at(i, i) += 1.0;
  std::vector<double> c(P);
  for (double& v : c) v = u(rng);
  const LuFactors lu = lu_factor_full_pivot(K);
  for (auto _ : state) {
    auto z = lu.solve(c);
    benchmark::DoNotOptimize(z.data());
  }
}

void BM_LuFactor(benchmark::State& state) {
  const int P = 100;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix B(P, P);
  for (double& v : B.data) v = u(rng);
  DenseMatrix K = matmul_at_b(B, B);
  for (int i = 0; i < P; ++i) K.at(i, i) += 1.0;
  for (auto _ : state) {
    auto lu = lu_factor_full_pivot(K);
    benchmark::DoNotOptimize(lu.condition_estimate);
  }
}

void BM_Svd(benchmark::State& state) {
  const int P = 100;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix B(P, P);
  for (double& v : B.data) v = u(rng);
  DenseMatrix K = matmul_at_b(B, B);
  for (auto _ : state) {
    auto s = svd(K);
    benchmark::DoNotOptimize(s.sigma.data());
  }
}

struct OnlineFixture {
  Mesh mesh;
  PhysicalParams params;
  TimeGrid grid;
  OfflineData offline;
  std::unique_ptr<NormalEquationSolver> solver;
  std::unique_ptr<ImplicitEulerStepper> stepper;
  Field T_prev;
  std::vector<double> rhs;
};

OnlineFixture& online_fixture() {
  static std::unique_ptr<OnlineFixture> cached;
  if (!cached) {
    auto f = std::make_unique<OnlineFixture>();
    Geometry g{2.0, 0.1, 1.2};
    f->mesh = standard_mesh("mesh5").build(g);
    f->params = table_params();
    f->grid = TimeGrid{5.0, 0.5, 1.0};
    const SensorArray sensors = standard_sensor_grid(g);
    const RbfBasis basis = make_rbf_basis(sensors, g, default_eta(sensors, g));
    f->offline = build_offline_data(f->mesh, f->params, f->grid, basis, sensors, {});
    InverseOptions opts;
    opts.time_basis = TimeBasis::Linear;
    f->solver = std::make_unique<NormalEquationSolver>(f->offline, opts);
    DiscreteOperator op = assemble_operators(f->mesh, f->params);
    f->stepper = std::make_unique<ImplicitEulerStepper>(op, f->grid.dt, StepperOptions{});
    f->T_prev.assign(static_cast<std::size_t>(f->mesh.num_cells()), f->params.T_0);
    f->rhs.assign(f->offline.P, 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : f->rhs) v = u(rng);
    cached = std::move(f);
  }
  return *cached;
}

// One measurement interval of the sequential loop: march the carried field
// through the interval, solve the normal equations, superpose the update.
void BM_OnlineInterval(benchmark::State& state) {
  OnlineFixture& f = online_fixture();
  const std::vector<double> w_prev(f.offline.P, 0.0);
  for (auto _ : state) {
    Field T_ic = f.T_prev;
    std::vector<double> probes(f.offline.P);
    Field T_end = solve_ic_problem(*f.stepper, f.grid, T_ic, f.offline.probe_cells, probes);
    auto w = f.solver->solve(f.rhs);
    Field T_k = reconstruct_temperature(f.offline, w, w_prev, T_end, TimeBasis::Linear);
    benchmark::DoNotOptimize(T_k.data());
  }
}

void BM_NormalEquationSetup(benchmark::State& state) {
  OnlineFixture& f = online_fixture();
  InverseOptions opts;
  opts.time_basis = TimeBasis::Linear;
  for (auto _ : state) {
    NormalEquationSolver solver(f.offline, opts);
    benchmark::DoNotOptimize(solver.condition_estimate());
  }
}

BENCHMARK_CAPTURE(BM_ImplicitEulerStep, mesh5, std::string("mesh5"))->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_ImplicitEulerStep, mesh4, std::string("mesh4"))->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_ImplicitEulerStep, mesh3, std::string("mesh3"))->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LuSolve)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LuFactor)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Svd)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NormalEquationSetup)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OnlineInterval)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
