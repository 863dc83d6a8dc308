#include <doctest.h>

#include <cmath>
#include <numeric>

#include "moldflux/errors.hpp"
#include "moldflux/fvm.hpp"

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

double csr_entry(const CsrMatrix& A, std::int64_t r, std::int64_t c) {
  for (std::int64_t p = A.row_ptr[static_cast<std::size_t>(r)];
       p < A.row_ptr[static_cast<std::size_t>(r) + 1]; ++p) {
    if (A.col_idx[static_cast<std::size_t>(p)] == c) return A.vals[static_cast<std::size_t>(p)];
  }
  return 0.0;
}

}  // namespace

TEST_CASE("time grid bookkeeping is exact integer arithmetic") {
  TimeGrid g{50.0, 0.5, 1.0};
  g.validate();
  CHECK(g.steps_per_meas() == 2);
  CHECK(g.num_meas() == 50);
  CHECK(g.num_steps() == 100);
  CHECK(g.meas_dt() == doctest::Approx(1.0));
  CHECK(g.tau(3) == doctest::Approx(3.0));
  const auto times = g.measurement_times();
  REQUIRE(times.size() == 50u);
  CHECK(times.front() == doctest::Approx(1.0));
  CHECK(times.back() == doctest::Approx(50.0));

  CHECK_NOTHROW((TimeGrid{50.0, 0.1, 1.0}).validate());
  CHECK_NOTHROW((TimeGrid{10.0, 0.25, 2.0}).validate());
  CHECK_THROWS_AS((TimeGrid{50.0, 0.3, 1.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((TimeGrid{50.0, 2.0, 1.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((TimeGrid{10.5, 0.5, 1.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((TimeGrid{0.0, 0.5, 1.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((TimeGrid{50.0, -0.5, 1.0}).validate(), InvalidArgument);
}

TEST_CASE("single-cell assembly: mass, Robin stiffness, fixed source") {
  Mesh m = build_structured_mesh(kSlab, 1, 1, 1);
  PhysicalParams p = table_params();
  DiscreteOperator op = assemble_operators(m, p);

  const double V = kSlab.L * kSlab.W * kSlab.H;
  const double A_sf = kSlab.L * kSlab.H;  // WaterFace area
  REQUIRE(op.n == 1);
  CHECK(op.rho_cp == doctest::Approx(p.rho * p.c_p));
  CHECK(op.mass[0] == doctest::Approx(V));
  CHECK(csr_entry(op.A, 0, 0) == doctest::Approx(p.h * A_sf));
  CHECK(op.robin_source[0] == doctest::Approx(p.h * A_sf * p.T_f));
  REQUIRE(op.hot.size() == 1u);
  CHECK(op.hot.area[0] == doctest::Approx(kSlab.L * kSlab.H));
}

TEST_CASE("two-cell assembly: two-point coupling k_s*A/d plus Robin diagonal") {
  Mesh m = build_structured_mesh(kSlab, 2, 1, 1);
  PhysicalParams p = table_params();
  DiscreteOperator op = assemble_operators(m, p);

  const double A_face = kSlab.W * kSlab.H;
  const double d = kSlab.L / 2.0;
  const double t = p.k_s * A_face / d;
  const double robin = p.h * (kSlab.L / 2.0) * kSlab.H;
  CHECK(csr_entry(op.A, 0, 1) == doctest::Approx(-t));
  CHECK(csr_entry(op.A, 1, 0) == doctest::Approx(-t));
  CHECK(csr_entry(op.A, 0, 0) == doctest::Approx(t + robin));
  CHECK(csr_entry(op.A, 1, 1) == doctest::Approx(t + robin));
}

TEST_CASE("stiffness rows sum to zero without the Robin term") {
  PhysicalParams p = table_params();
  p.h = 0.0;
  Mesh m = build_structured_mesh(kSlab, 5, 3, 4);
  DiscreteOperator op = assemble_operators(m, p);
  for (std::int64_t r = 0; r < op.n; ++r) {
    double sum = 0.0;
    for (std::int64_t q = op.A.row_ptr[static_cast<std::size_t>(r)];
         q < op.A.row_ptr[static_cast<std::size_t>(r) + 1]; ++q) {
      sum += op.A.vals[static_cast<std::size_t>(q)];
    }
    CHECK(std::abs(sum) < 1e-9);
  }
}

TEST_CASE("stiffness is symmetric") {
  Mesh m = build_structured_mesh(kSlab, 4, 3, 5);
  DiscreteOperator op = assemble_operators(m, table_params());
  for (std::int64_t r = 0; r < op.n; ++r) {
    for (std::int64_t q = op.A.row_ptr[static_cast<std::size_t>(r)];
         q < op.A.row_ptr[static_cast<std::size_t>(r) + 1]; ++q) {
      const std::int64_t c = op.A.col_idx[static_cast<std::size_t>(q)];
      CHECK(op.A.vals[static_cast<std::size_t>(q)] == doctest::Approx(csr_entry(op.A, c, r)));
    }
  }
}

TEST_CASE("flux load vector: constant outward flux on the single cell") {
  Mesh m = build_structured_mesh(kSlab, 1, 1, 1);
  DiscreteOperator op = assemble_operators(m, table_params());
  const double c = 1234.5;
  Field b = flux_load_vector(op, [&](const Vec3&, double) { return c; }, 0.0);
  REQUIRE(b.size() == 1u);
  CHECK(b[0] == doctest::Approx(-c * kSlab.L * kSlab.H));
}

TEST_CASE("Robin equilibrium: uniform T_f is a fixed point without flux") {
  Mesh m = build_structured_mesh(kSlab, 6, 3, 4);
  PhysicalParams p = table_params();
  DiscreteOperator op = assemble_operators(m, p);
  ImplicitEulerStepper stepper(op, 0.5, StepperOptions{1e-13, -1});
  Field T(static_cast<std::size_t>(op.n), p.T_f);
  for (int s = 0; s < 3; ++s) stepper.step_robin_only(T);
  for (double v : T) CHECK(v == doctest::Approx(p.T_f).epsilon(1e-12));
}

TEST_CASE("single-cell march matches the lumped recursion to 1e-12") {
  Mesh m = build_structured_mesh(kSlab, 1, 1, 1);
  PhysicalParams p = table_params();
  DiscreteOperator op = assemble_operators(m, p);
  const double dt = 0.5;
  const double g = -2.5e5;  // inward flux heats
  ImplicitEulerStepper stepper(op, dt, StepperOptions{1e-15, -1});

  const double V = kSlab.L * kSlab.W * kSlab.H;
  const double A_sf = kSlab.L * kSlab.H;
  const double A_hot = kSlab.L * kSlab.H;
  const double C = p.rho * p.c_p * V;

  Field T(1, p.T_0);
  double T_ref = p.T_0;
  Field b(1);
  for (int s = 0; s < 10; ++s) {
    b[0] = op.robin_source[0] - g * A_hot;
    stepper.step(T, b);
    T_ref = (C * T_ref + dt * (p.h * A_sf * p.T_f - g * A_hot)) / (C + dt * p.h * A_sf);
    CHECK(std::abs(T[0] - T_ref) <= 1e-12 * std::abs(T_ref));
  }
  CHECK(T[0] > p.T_0);  // heating flux raises the lumped temperature
}

TEST_CASE("adiabatic march conserves thermal energy") {
  PhysicalParams p = table_params();
  p.h = 0.0;
  Mesh m = build_structured_mesh(kSlab, 5, 4, 3);
  DiscreteOperator op = assemble_operators(m, p);
  ImplicitEulerStepper stepper(op, 0.25, StepperOptions{1e-13, -1});

  Field T(static_cast<std::size_t>(op.n));
  for (std::size_t i = 0; i < T.size(); ++i) T[i] = 300.0 + static_cast<double>(i % 7);
  const auto energy = [&](const Field& f) {
    double e = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) e += op.mass[i] * f[i];
    return e;
  };
  const double e0 = energy(T);
  for (int s = 0; s < 5; ++s) stepper.step_robin_only(T);
  CHECK(energy(T) == doctest::Approx(e0).epsilon(1e-10));
}

TEST_CASE("per-step energy balance closes to solver tolerance") {
  Mesh m = build_structured_mesh(kSlab, 10, 5, 6);
  PhysicalParams p = table_params();
  p.T_0 = 380.0;
  DiscreteOperator op = assemble_operators(m, p);
  const double dt = 0.5;
  ImplicitEulerStepper stepper(op, dt, StepperOptions{1e-13, -1});
  const FluxFn g = [](const Vec3& x, double) { return -1.0e5 * (1.0 + x.z); };

  Field T(static_cast<std::size_t>(op.n), p.T_0);
  Field T_prev = T;
  Field b(static_cast<std::size_t>(op.n));
  for (int s = 1; s <= 3; ++s) {
    const double t_next = dt * s;
    b = flux_load_vector(op, g, t_next);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += op.robin_source[i];
    T_prev = T;
    stepper.step(T, b);

    double storage = 0.0;
    for (std::size_t i = 0; i < T.size(); ++i) storage += op.mass[i] * (T[i] - T_prev[i]);
    storage *= op.rho_cp / dt;

    double influx = 0.0;
    for (std::size_t f = 0; f < op.hot.size(); ++f) {
      influx -= g(op.hot.center[f], t_next) * op.hot.area[f];
    }
    double robin_loss = 0.0;
    for (const Face& face : m.faces) {
      if (face.patch == BoundaryPatch::WaterFace) {
        robin_loss += p.h * (T[static_cast<std::size_t>(face.owner)] - p.T_f) * face.area;
      }
    }
    CHECK(storage == doctest::Approx(influx - robin_loss).epsilon(1e-7));
  }
}

TEST_CASE("x-symmetric flux produces an x-symmetric field") {
  Mesh m = build_structured_mesh(kSlab, 8, 3, 4);
  PhysicalParams p = table_params();
  DiscreteOperator op = assemble_operators(m, p);
  const FluxFn g = [&](const Vec3& x, double) {
    const double r = x.x - kSlab.L / 2.0;
    return -2.0e5 * (1.0 + r * r);
  };
  TimeGrid grid{2.0, 0.5, 1.0};
  DirectOptions opts;
  opts.stepper.tol_lin = 1e-13;
  DirectResult res = solve_direct(m, p, grid, g, {}, opts);
  const Field& T = res.trajectory.fields.back();
  for (std::int64_t k = 0; k < m.nz; ++k)
    for (std::int64_t j = 0; j < m.ny; ++j)
      for (std::int64_t i = 0; i < m.nx / 2; ++i) {
        const double a = T[static_cast<std::size_t>(m.cell_index(i, j, k))];
        const double b = T[static_cast<std::size_t>(m.cell_index(m.nx - 1 - i, j, k))];
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
      }
}

TEST_CASE("direct solve records probe samples at every measurement instant") {
  Mesh m = build_structured_mesh(kSlab, 6, 3, 4);
  PhysicalParams p = table_params();
  TimeGrid grid{4.0, 0.5, 1.0};
  const std::vector<std::int64_t> probes{0, 5, 17};
  DirectResult res = solve_direct(
      m, p, grid, [](const Vec3&, double) { return 0.0; }, probes, {});
  REQUIRE(res.sample_times.size() == 4u);
  REQUIRE(res.probe_samples.size() == 4u);
  for (const Field& row : res.probe_samples) {
    REQUIRE(row.size() == probes.size());
    // g = 0 and T_0 = T_f keeps the slab at equilibrium
    for (double v : row) CHECK(v == doctest::Approx(p.T_f));
  }
}

TEST_CASE("heated slab decays monotonically toward coolant without flux") {
  Mesh m = build_structured_mesh(kSlab, 4, 3, 3);
  PhysicalParams p = table_params();
  DiscreteOperator op = assemble_operators(m, p);
  ImplicitEulerStepper stepper(op, 0.5, StepperOptions{1e-13, -1});
  const double T_start = p.T_f + 40.0;
  Field T(static_cast<std::size_t>(op.n), T_start);
  stepper.step_robin_only(T);
  for (double v : T) {
    CHECK(v > p.T_f);
    CHECK(v < T_start);
  }
}

TEST_CASE("stepper matches the one-shot step helper") {
  Mesh m = build_structured_mesh(kSlab, 5, 2, 3);
  PhysicalParams p = table_params();
  DiscreteOperator op = assemble_operators(m, p);
  const double dt = 0.25;
  Field T0(static_cast<std::size_t>(op.n), 370.0);
  Field b = op.robin_source;

  Field T_a = T0;
  ImplicitEulerStepper stepper(op, dt, StepperOptions{1e-13, -1});
  stepper.step(T_a, b);
  Field T_b = step_implicit_euler(op, T0, dt, b, StepperOptions{1e-13, -1});
  for (std::size_t i = 0; i < T_a.size(); ++i) CHECK(T_a[i] == doctest::Approx(T_b[i]));
}

TEST_CASE("physical parameter validation") {
  PhysicalParams p = table_params();
  CHECK_NOTHROW(p.validate());
  p.k_s = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = table_params();
  p.h = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}
