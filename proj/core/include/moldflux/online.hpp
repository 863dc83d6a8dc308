#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "moldflux/measurements.hpp"
#include "moldflux/offline.hpp"

namespace moldflux {

enum class Regularizer : std::uint8_t { LU, TSVD };
const char* regularizer_name(Regularizer r);

struct InverseOptions {
  TimeBasis time_basis = TimeBasis::Constant;
  double p_g = 0.0;
  Regularizer regularizer = Regularizer::LU;
  std::size_t alpha_tsvd = 0;       // 0: pick by spectrum gap
  std::vector<double> w0;           // Linear: weights at t = 0 (default zeros)
  StepperOptions stepper;
  bool store_fields = false;        // keep reconstructed fields at every tau_k
  double lu_condition_limit = 1e14; // LU refuses above this condition estimate
};

struct IntervalDiagnostics {
  double S1 = 0.0;             // 0.5*sum of squared sensor residuals [K^2]
  double S2 = 0.0;             // S1 + p_g * w^T Phi w
  double residual_norm = 0.0;  // ||predicted - measured|| at the sensors
  double wall_ms = 0.0;
};

struct InverseSolution {
  WeightsTimeline timeline;
  std::vector<IntervalDiagnostics> diagnostics;
  std::vector<Field> fields;   // with store_fields: reconstruction at each tau_k
  Field final_field;
  bool diverged = false;              // non-finite weights encountered
  std::size_t completed_intervals = 0;
  std::vector<double> sigma;          // TSVD: spectrum of the normal matrix
  std::size_t alpha_used = 0;         // TSVD: truncation index
  double condition_estimate = 0.0;    // LU: pivot ratio of the normal matrix
  double mean_wall_ms = 0.0;          // mean per-interval wall time
};

// Normal-equation system  (B^T B + 2 p_g Phi) w = B^T r  with B = theta
// (Constant) or theta_tilde (Linear), factored once and reused every interval.
class NormalEquationSolver {
 public:
  NormalEquationSolver(const OfflineData& offline, const InverseOptions& options);

  // rhs_meas: measured-minus-predicted sensor values the weights must explain.
  std::vector<double> solve(const std::vector<double>& rhs_meas) const;

  const DenseMatrix& B() const { return *B_; }
  const std::vector<double>& sigma() const { return sigma_; }
  std::size_t alpha_used() const { return alpha_used_; }
  double condition_estimate() const { return condition_estimate_; }

 private:
  const OfflineData* offline_;
  InverseOptions options_;
  const DenseMatrix* B_;
  DenseMatrix K_;
  std::optional<LuFactors> lu_;
  std::optional<SvdResult> svd_;
  std::vector<double> sigma_;
  std::size_t alpha_used_ = 0;
  double condition_estimate_ = 0.0;
};

// March the start-value problem over one measurement interval: no boundary
// flux, full Robin condition, starting from T_prev.  Returns the field at the
// interval end; probe_values receives its sensor-cell samples.
Field solve_ic_problem(const ImplicitEulerStepper& stepper, const TimeGrid& grid,
                       const Field& T_prev, const std::vector<std::int64_t>& probe_cells,
                       std::vector<double>& probe_values);

// Field superposition at the interval end tau_k.
Field reconstruct_temperature(const OfflineData& offline, const std::vector<double>& w,
                              const std::vector<double>& w_prev, const Field& T_ic,
                              TimeBasis time_basis);

// Sequential one-interval-at-a-time inversion over the whole series.
InverseSolution run_sequential_inversion(const Mesh& mesh, const PhysicalParams& params,
                                         const TimeGrid& grid, const OfflineData& offline,
                                         const MeasurementSeries& measurements,
                                         const InverseOptions& options);

}  // namespace moldflux
