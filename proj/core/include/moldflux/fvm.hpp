#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "moldflux/mesh.hpp"
#include "moldflux/sparse.hpp"

namespace moldflux {

struct PhysicalParams {
  double k_s = 0.0;   // conductivity [W/(m K)]
  double rho = 0.0;   // density [kg/m^3]
  double c_p = 0.0;   // specific heat [J/(kg K)]
  double h = 0.0;     // water-side heat transfer coefficient [W/(m^2 K)]
  double T_f = 0.0;   // cooling water temperature [K]
  double T_0 = 0.0;   // initial temperature [K]

  void validate() const {
    if (!(k_s > 0.0) || !(rho > 0.0) || !(c_p > 0.0)) {
      throw InvalidArgument("PhysicalParams: k_s, rho, c_p must be positive");
    }
    if (h < 0.0) throw InvalidArgument("PhysicalParams: h must be >= 0");
  }
  double rho_cp() const { return rho * c_p; }
};

// Uniform time grid on (0, t_f] with step dt and measurement rate f_samp.
// 1/(f_samp*dt) and t_f*f_samp must be integers; all step/measurement
// bookkeeping is integer-based so measurement instants are exact.
struct TimeGrid {
  double t_f = 0.0;
  double dt = 0.0;
  double f_samp = 0.0;

  void validate() const;
  std::int64_t steps_per_meas() const;   // time steps per measurement interval
  std::int64_t num_meas() const;         // number of measurement instants P_t
  std::int64_t num_steps() const { return steps_per_meas() * num_meas(); }
  double meas_dt() const { return 1.0 / f_samp; }
  double tau(std::int64_t k) const { return static_cast<double>(k) / f_samp; }
  std::vector<double> measurement_times() const;
};

// Outward boundary flux sample [W/m^2]: positive values remove energy.
using FluxFn = std::function<double(const Vec3&, double)>;

// Semi-discrete system  rho*c_p*M dT/dt + A T = b(t), M = diag(cell volumes),
// A = two-point flux stiffness plus Robin h*area on WaterFace diagonals,
// b(t) = robin_source + flux load on HotFace owners.
struct DiscreteOperator {
  std::int64_t n = 0;
  Field mass;           // cell volumes
  CsrMatrix A;
  Field robin_source;   // h*T_f*area per WaterFace owner, else 0
  HotFaceTable hot;
  double rho_cp = 0.0;
};

DiscreteOperator assemble_operators(const Mesh& mesh, const PhysicalParams& params);

// Load vector of an outward flux g on the HotFace: entry -g(center,t)*area
// accumulated on owner cells.
Field flux_load_vector(const DiscreteOperator& op, const FluxFn& g, double t);

struct StepperOptions {
  double tol_lin = 1e-10;
  std::int64_t max_iter = -1;  // <0: 10*n
};

// One implicit Euler step:  (rho*c_p*M + dt*A) T_next = rho*c_p*M T + dt*b_next.
// The system matrix is time independent, so it is prefactored per dt here.
class ImplicitEulerStepper {
 public:
  ImplicitEulerStepper(const DiscreteOperator& op, double dt, StepperOptions options = {});

  // In-place step with full load vector b_next (Robin source included).
  CgResult step(Field& T, const Field& b_next) const;
  // Step with b_next = op.robin_source (no boundary flux, full Robin).
  CgResult step_robin_only(Field& T) const;

  const DiscreteOperator& op() const { return *op_; }
  double dt() const { return dt_; }

 private:
  const DiscreteOperator* op_;
  double dt_;
  StepperOptions options_;
  CsrMatrix system_;  // rho*c_p*M + dt*A
};

Field step_implicit_euler(const DiscreteOperator& op, const Field& T, double dt,
                          const Field& b_next, StepperOptions options = {});

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> fields;
  std::size_t size() const { return times.size(); }
};

struct DirectOptions {
  StepperOptions stepper;
  bool store_fields = false;    // keep the field at every measurement instant
  bool store_all_steps = false; // keep the field at every time step (small cases)
};

struct DirectResult {
  Trajectory trajectory;            // per DirectOptions; final field always last
  std::vector<double> sample_times; // measurement instants tau_k
  // probe_samples[k][s]: temperature in the probe cell s at tau_{k+1}
  std::vector<Field> probe_samples;
};

// March the direct problem from T(0) = T_0 with outward HotFace flux g,
// recording probe-cell samples at every measurement instant.
DirectResult solve_direct(const Mesh& mesh, const PhysicalParams& params, const TimeGrid& grid,
                          const FluxFn& g, const std::vector<std::int64_t>& probe_cells,
                          const DirectOptions& options = {});

}  // namespace moldflux
