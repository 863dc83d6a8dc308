#include "moldflux/fvm.hpp"

#include <array>
#include <cmath>

namespace moldflux {

void TimeGrid::validate() const {
  if (!(t_f > 0.0) || !(dt > 0.0) || !(f_samp > 0.0)) {
    throw InvalidArgument("TimeGrid: t_f, dt, f_samp must be positive");
  }
  const double spm = 1.0 / (f_samp * dt);
  if (std::abs(spm - std::round(spm)) > 1e-9 * spm || std::round(spm) < 1.0) {
    throw InvalidArgument("TimeGrid: 1/(f_samp*dt) must be a positive integer");
  }
  const double nm = t_f * f_samp;
  if (std::abs(nm - std::round(nm)) > 1e-9 * nm || std::round(nm) < 1.0) {
    throw InvalidArgument("TimeGrid: t_f*f_samp must be a positive integer");
  }
}

std::int64_t TimeGrid::steps_per_meas() const {
  return static_cast<std::int64_t>(std::llround(1.0 / (f_samp * dt)));
}

std::int64_t TimeGrid::num_meas() const {
  return static_cast<std::int64_t>(std::llround(t_f * f_samp));
}

std::vector<double> TimeGrid::measurement_times() const {
  std::vector<double> out;
  const std::int64_t p = num_meas();
  out.reserve(static_cast<std::size_t>(p));
  for (std::int64_t k = 1; k <= p; ++k) out.push_back(tau(k));
  return out;
}

DiscreteOperator assemble_operators(const Mesh& mesh, const PhysicalParams& params) {
  params.validate();
  DiscreteOperator op;
  op.n = mesh.num_cells();
  op.rho_cp = params.rho_cp();
  op.mass.assign(static_cast<std::size_t>(op.n), mesh.cell_volume());
  op.robin_source.assign(static_cast<std::size_t>(op.n), 0.0);
  op.hot = hot_face_table(mesh);

  const std::int64_t nx = mesh.nx, ny = mesh.ny, nz = mesh.nz;
  // Two-point transmissibilities k_s*area/distance on the uniform grid.
  const double tx = params.k_s * (mesh.dy * mesh.dz) / mesh.dx;
  const double ty = params.k_s * (mesh.dx * mesh.dz) / mesh.dy;
  const double tz = params.k_s * (mesh.dx * mesh.dy) / mesh.dz;
  const double robin_coeff = params.h * (mesh.dx * mesh.dz);

  CsrMatrix& A = op.A;
  A.n = op.n;
  A.row_ptr.assign(static_cast<std::size_t>(op.n) + 1, 0);

  struct Neighbor {
    std::int64_t offset;
    double coeff;
  };
  // Column-sorted stencil: -z, -y, -x, diag, +x, +y, +z.
  auto row_entries = [&](std::int64_t i, std::int64_t j, std::int64_t k,
                         std::array<Neighbor, 7>& nb) {
    std::size_t cnt = 0;
    double diag = 0.0;
    const std::int64_t sxy = nx * ny;
    if (k > 0) { nb[cnt++] = {-sxy, -tz}; diag += tz; }
    if (j > 0) { nb[cnt++] = {-nx, -ty}; diag += ty; }
    if (i > 0) { nb[cnt++] = {-1, -tx}; diag += tx; }
    const std::size_t diag_slot = cnt++;
    if (i + 1 < nx) { nb[cnt++] = {1, -tx}; diag += tx; }
    if (j + 1 < ny) { nb[cnt++] = {nx, -ty}; diag += ty; }
    if (k + 1 < nz) { nb[cnt++] = {sxy, -tz}; diag += tz; }
    if (j == ny - 1) diag += robin_coeff;  // WaterFace Robin term
    nb[diag_slot] = {0, diag};
    return cnt;
  };

  std::array<Neighbor, 7> nb{};
  for (std::int64_t k = 0; k < nz; ++k)
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i < nx; ++i) {
        const std::int64_t c = mesh.cell_index(i, j, k);
        const std::size_t cnt = row_entries(i, j, k, nb);
        A.row_ptr[static_cast<std::size_t>(c) + 1] = static_cast<std::int64_t>(cnt);
      }
  for (std::size_t r = 0; r < static_cast<std::size_t>(op.n); ++r) {
    A.row_ptr[r + 1] += A.row_ptr[r];
  }
  A.col_idx.resize(static_cast<std::size_t>(A.row_ptr.back()));
  A.vals.resize(static_cast<std::size_t>(A.row_ptr.back()));
  for (std::int64_t k = 0; k < nz; ++k)
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i < nx; ++i) {
        const std::int64_t c = mesh.cell_index(i, j, k);
        const std::size_t cnt = row_entries(i, j, k, nb);
        auto p = static_cast<std::size_t>(A.row_ptr[static_cast<std::size_t>(c)]);
        for (std::size_t q = 0; q < cnt; ++q, ++p) {
          A.col_idx[p] = c + nb[q].offset;
          A.vals[p] = nb[q].coeff;
        }
        if (j == ny - 1) {
          op.robin_source[static_cast<std::size_t>(c)] = params.h * params.T_f *
                                                         (mesh.dx * mesh.dz);
        }
      }

  return op;
}

Field flux_load_vector(const DiscreteOperator& op, const FluxFn& g, double t) {
  Field b(static_cast<std::size_t>(op.n), 0.0);
  for (std::size_t f = 0; f < op.hot.size(); ++f) {
    b[static_cast<std::size_t>(op.hot.cell[f])] -= g(op.hot.center[f], t) * op.hot.area[f];
  }
  return b;
}

ImplicitEulerStepper::ImplicitEulerStepper(const DiscreteOperator& op, double dt,
                                           StepperOptions options)
    : op_(&op), dt_(dt), options_(options) {
  if (!(dt > 0.0)) throw InvalidArgument("ImplicitEulerStepper: dt must be positive");
  system_ = op.A;
  for (std::size_t i = 0; i < system_.vals.size(); ++i) system_.vals[i] *= dt;
  for (std::int64_t r = 0; r < system_.n; ++r) {
    for (std::int64_t p = system_.row_ptr[static_cast<std::size_t>(r)];
         p < system_.row_ptr[static_cast<std::size_t>(r) + 1]; ++p) {
      if (system_.col_idx[static_cast<std::size_t>(p)] == r) {
        system_.vals[static_cast<std::size_t>(p)] +=
            op.rho_cp * op.mass[static_cast<std::size_t>(r)];
      }
    }
  }
}

CgResult ImplicitEulerStepper::step(Field& T, const Field& b_next) const {
  const auto n = static_cast<std::size_t>(op_->n);
  // Thread-local so concurrent marches of independent problems stay safe.
  static thread_local Field rhs;
  rhs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] = op_->rho_cp * op_->mass[i] * T[i] + dt_ * b_next[i];
  }
  CgOptions cg;
  cg.tol = options_.tol_lin;
  cg.max_iter = options_.max_iter;
  return cg_solve(system_, rhs, T, cg);
}

CgResult ImplicitEulerStepper::step_robin_only(Field& T) const {
  return step(T, op_->robin_source);
}

Field step_implicit_euler(const DiscreteOperator& op, const Field& T, double dt,
                          const Field& b_next, StepperOptions options) {
  ImplicitEulerStepper stepper(op, dt, options);
  Field out = T;
  stepper.step(out, b_next);
  return out;
}

DirectResult solve_direct(const Mesh& mesh, const PhysicalParams& params, const TimeGrid& grid,
                          const FluxFn& g, const std::vector<std::int64_t>& probe_cells,
                          const DirectOptions& options) {
  grid.validate();
  const DiscreteOperator op = assemble_operators(mesh, params);
  ImplicitEulerStepper stepper(op, grid.dt, options.stepper);

  const auto n = static_cast<std::size_t>(op.n);
  Field T(n, params.T_0);
  Field b(n);

  DirectResult result;
  const std::int64_t spm = grid.steps_per_meas();
  const std::int64_t total = grid.num_steps();
  result.sample_times = grid.measurement_times();
  result.probe_samples.reserve(static_cast<std::size_t>(grid.num_meas()));

  auto record_probes = [&]() {
    Field row(probe_cells.size());
    for (std::size_t s = 0; s < probe_cells.size(); ++s) {
      row[s] = T[static_cast<std::size_t>(probe_cells[s])];
    }
    result.probe_samples.push_back(std::move(row));
  };

  if (options.store_all_steps) {
    result.trajectory.times.push_back(0.0);
    result.trajectory.fields.push_back(T);
  }
  for (std::int64_t step = 1; step <= total; ++step) {
    const double t_next = static_cast<double>(step) * grid.dt;
    b = op.robin_source;
    for (std::size_t f = 0; f < op.hot.size(); ++f) {
      b[static_cast<std::size_t>(op.hot.cell[f])] -= g(op.hot.center[f], t_next) * op.hot.area[f];
    }
    stepper.step(T, b);
    const bool at_meas = (step % spm) == 0;
    if (options.store_all_steps || (options.store_fields && at_meas)) {
      result.trajectory.times.push_back(t_next);
      result.trajectory.fields.push_back(T);
    }
    if (at_meas) record_probes();
  }
  if (!options.store_fields && !options.store_all_steps) {
    result.trajectory.times.push_back(grid.t_f);
    result.trajectory.fields.push_back(T);
  }
  return result;
}

}  // namespace moldflux
