#include "moldflux/online.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace moldflux {

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

const char* regularizer_name(Regularizer r) {
  switch (r) {
    case Regularizer::LU: return "lu";
    case Regularizer::TSVD: return "tsvd";
  }
  return "unknown";
}

NormalEquationSolver::NormalEquationSolver(const OfflineData& offline,
                                           const InverseOptions& options)
    : offline_(&offline), options_(options) {
  if (offline.P == 0) throw InvalidArgument("NormalEquationSolver: empty basis");
  if (options.p_g < 0.0) throw InvalidArgument("NormalEquationSolver: p_g must be >= 0");

  B_ = (options.time_basis == TimeBasis::Constant) ? &offline.theta : &offline.theta_tilde;
  if (B_->rows == 0 || B_->cols != offline.P) {
    throw InvalidState("NormalEquationSolver: offline response matrix has wrong shape");
  }

  K_ = matmul_at_b(*B_, *B_);
  if (options.p_g > 0.0) {
    if (offline.phi.rows != K_.rows || offline.phi.cols != K_.cols) {
      throw InvalidState("NormalEquationSolver: penalty Gram matrix has wrong shape");
    }
    for (std::size_t i = 0; i < K_.data.size(); ++i) {
      K_.data[i] += 2.0 * options.p_g * offline.phi.data[i];
    }
  }

  switch (options.regularizer) {
    case Regularizer::LU: {
      lu_ = lu_factor_full_pivot(K_);
      condition_estimate_ = lu_->condition_estimate;
      if (condition_estimate_ > options.lu_condition_limit) {
        std::ostringstream msg;
        msg << "NormalEquationSolver: normal matrix condition estimate " << condition_estimate_
            << " exceeds limit " << options.lu_condition_limit
            << "; use TSVD or a penalty p_g > 0";
        throw SingularMatrix(msg.str());
      }
      break;
    }
    case Regularizer::TSVD: {
      svd_ = svd(K_);
      sigma_ = svd_->sigma;
      const std::size_t requested =
          options.alpha_tsvd == 0 ? pick_alpha_by_spectrum_gap(*svd_) : options.alpha_tsvd;
      if (requested < 1) throw InvalidArgument("NormalEquationSolver: alpha_tsvd must be >= 1");
      alpha_used_ = std::min(requested, svd_->rank);
      break;
    }
  }
}

std::vector<double> NormalEquationSolver::solve(const std::vector<double>& rhs_meas) const {
  const std::vector<double> c = matvec_transposed(*B_, rhs_meas);
  if (options_.regularizer == Regularizer::LU) return lu_->solve(c);
  return tsvd_solve(*svd_, c, alpha_used_);
}

Field solve_ic_problem(const ImplicitEulerStepper& stepper, const TimeGrid& grid,
                       const Field& T_prev, const std::vector<std::int64_t>& probe_cells,
                       std::vector<double>& probe_values) {
  Field T = T_prev;
  const std::int64_t spm = grid.steps_per_meas();
  for (std::int64_t s = 0; s < spm; ++s) stepper.step_robin_only(T);
  probe_values.resize(probe_cells.size());
  for (std::size_t i = 0; i < probe_cells.size(); ++i) {
    probe_values[i] = T[static_cast<std::size_t>(probe_cells[i])];
  }
  return T;
}

Field reconstruct_temperature(const OfflineData& offline, const std::vector<double>& w,
                              const std::vector<double>& w_prev, const Field& T_ic,
                              TimeBasis time_basis) {
  if (w.size() != offline.P) throw InvalidArgument("reconstruct_temperature: weight size mismatch");
  Field T = T_ic;
  for (std::size_t i = 0; i < offline.P; ++i) {
    const Field& phi_field = offline.t_phi_final[i];
    const double wi = w[i];
    if (wi != 0.0) {
      for (std::size_t c = 0; c < T.size(); ++c) T[c] += wi * phi_field[c];
    }
    if (time_basis == TimeBasis::Linear) {
      if (w_prev.size() != offline.P) {
        throw InvalidArgument("reconstruct_temperature: previous weight size mismatch");
      }
      const double slope = (w[i] - w_prev[i]) * offline.f_samp;
      if (slope != 0.0) {
        const Field& d_field = offline.t_d_final[i];
        for (std::size_t c = 0; c < T.size(); ++c) T[c] += slope * d_field[c];
      }
    }
  }
  return T;
}

InverseSolution run_sequential_inversion(const Mesh& mesh, const PhysicalParams& params,
                                         const TimeGrid& grid, const OfflineData& offline,
                                         const MeasurementSeries& measurements,
                                         const InverseOptions& options) {
  params.validate();
  grid.validate();
  measurements.validate();

  if (offline.n_cells != mesh.num_cells() || offline.nx != mesh.nx || offline.ny != mesh.ny ||
      offline.nz != mesh.nz) {
    throw InvalidArgument("run_sequential_inversion: offline data built on a different mesh");
  }
  if (std::abs(offline.dt - grid.dt) > 1e-12 * grid.dt) {
    throw InvalidArgument("run_sequential_inversion: offline data built with a different dt");
  }
  if (std::abs(offline.f_samp - grid.f_samp) > 1e-9 * grid.f_samp ||
      std::abs(measurements.f_samp - grid.f_samp) > 1e-9 * grid.f_samp) {
    throw InvalidArgument("run_sequential_inversion: sampling rate mismatch");
  }
  if (measurements.num_sensors() != offline.probe_cells.size()) {
    throw InvalidArgument("run_sequential_inversion: sensor count differs from offline data");
  }
  const std::size_t num_intervals = measurements.num_meas();
  if (num_intervals > static_cast<std::size_t>(grid.num_meas())) {
    throw InvalidArgument("run_sequential_inversion: more measurements than the time grid holds");
  }

  std::vector<double> w_prev = options.w0;
  if (options.time_basis == TimeBasis::Linear) {
    if (w_prev.empty()) w_prev.assign(offline.P, 0.0);
    if (w_prev.size() != offline.P) {
      throw InvalidArgument("run_sequential_inversion: w0 size differs from basis size");
    }
  }

  const NormalEquationSolver solver(offline, options);

  const DiscreteOperator op = assemble_operators(mesh, params);
  const ImplicitEulerStepper stepper(op, grid.dt, options.stepper);

  InverseSolution sol;
  sol.timeline.time_basis = options.time_basis;
  sol.timeline.f_samp = grid.f_samp;
  sol.timeline.w0 = w_prev;
  sol.sigma = solver.sigma();
  sol.alpha_used = solver.alpha_used();
  sol.condition_estimate = solver.condition_estimate();

  const double inf = std::numeric_limits<double>::infinity();
  Field T_prev(static_cast<std::size_t>(mesh.num_cells()), params.T_0);
  std::vector<double> ic_probes;

  using Clock = std::chrono::steady_clock;
  for (std::size_t k = 0; k < num_intervals; ++k) {
    const auto t_start = Clock::now();

    Field T_ic = solve_ic_problem(stepper, grid, T_prev, offline.probe_cells, ic_probes);

    // Sensor data the new weights must explain: measured minus the free
    // evolution of the previous state, plus the carried ramp start (Linear).
    std::vector<double> rhs(measurements.num_sensors());
    for (std::size_t s = 0; s < rhs.size(); ++s) {
      rhs[s] = measurements.readings[k][s] - ic_probes[s];
    }
    if (options.time_basis == TimeBasis::Linear) {
      const std::vector<double> carry = matvec(offline.theta_d, w_prev);
      for (std::size_t s = 0; s < rhs.size(); ++s) rhs[s] += carry[s];
    }

    const std::vector<double> w = solver.solve(rhs);
    IntervalDiagnostics diag;
    if (!all_finite(w)) {
      diag.S1 = inf;
      diag.S2 = inf;
      diag.residual_norm = inf;
      diag.wall_ms =
          std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
      sol.diagnostics.push_back(diag);
      sol.diverged = true;
      break;
    }

    const std::vector<double> predicted = matvec(solver.B(), w);
    double r2 = 0.0;
    for (std::size_t s = 0; s < rhs.size(); ++s) {
      const double r = predicted[s] - rhs[s];
      r2 += r * r;
    }
    diag.S1 = 0.5 * r2;
    diag.residual_norm = std::sqrt(r2);
    diag.S2 = diag.S1;
    if (options.p_g > 0.0) {
      diag.S2 += options.p_g * dot(w, matvec(offline.phi, w));
    }

    Field T_k = reconstruct_temperature(offline, w, w_prev, T_ic, options.time_basis);

    diag.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t_start).count();
    sol.diagnostics.push_back(diag);
    sol.timeline.w.push_back(w);
    sol.completed_intervals = k + 1;
    if (options.store_fields) sol.fields.push_back(T_k);
    T_prev = std::move(T_k);
    w_prev = w;
  }

  sol.final_field = std::move(T_prev);
  double wall_sum = 0.0;
  for (const IntervalDiagnostics& d : sol.diagnostics) wall_sum += d.wall_ms;
  sol.mean_wall_ms = sol.diagnostics.empty() ? 0.0 : wall_sum / sol.diagnostics.size();
  return sol;
}

}  // namespace moldflux
