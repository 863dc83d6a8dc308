#pragma once

#include <memory>
#include <string>
#include <vector>

#include "moldflux/fvm.hpp"
#include "moldflux/rbf.hpp"

namespace moldflux {

struct OfflineOptions {
  StepperOptions stepper;
  bool keep_inner_snapshots = false;  // retain every inner-step field (small cases)
  int threads = 1;
};

// Unit-basis and derivative responses over one measurement interval
// (0, 1/f_samp], reused for every interval by time translation.
//
//   theta(i,j)   = T_phi_j(x_i, tau_1)            basis problem: flux phi_j,
//                                                  homogeneous Robin, zero start
//   theta_d(i,j) = f_samp * T_d_j(x_i, tau_1)      derivative problem: volumetric
//                                                  source -rho*c_p*T_phi_j, zero flux
//   theta_tilde  = theta + theta_d
//   phi          = HotFace Gram matrix of the basis
struct OfflineData {
  std::string fingerprint;
  std::int64_t nx = 0, ny = 0, nz = 0;
  double dt = 0.0;
  double f_samp = 0.0;
  double eta = 0.0;
  std::int64_t n_cells = 0;
  std::size_t P = 0;

  std::vector<Vec3> sensor_points;
  std::vector<Vec3> centers;
  std::vector<std::int64_t> probe_cells;

  DenseMatrix theta;
  DenseMatrix theta_d;
  DenseMatrix theta_tilde;
  DenseMatrix phi;

  std::vector<Field> t_phi_final;  // T_phi_j at tau_1, one field per basis function
  std::vector<Field> t_d_final;    // T_d_j at tau_1

  // Present only with keep_inner_snapshots; times 0, dt, ..., tau_1.
  std::vector<Trajectory> t_phi_inner;
  std::vector<Trajectory> t_d_inner;

  bool has_inner() const { return !t_phi_inner.empty(); }
  RbfBasis basis() const { return RbfBasis{centers, eta}; }
};

std::vector<std::int64_t> probe_cells_for(const Mesh& mesh, const SensorArray& sensors);

// Canonical digest of everything the offline dataset depends on.
std::string offline_fingerprint(const Mesh& mesh, const PhysicalParams& params,
                                const TimeGrid& grid, const RbfBasis& basis,
                                const SensorArray& sensors, const StepperOptions& stepper);

// Basis problems: unit flux phi_j on the HotFace, homogeneous Robin h*T on
// the WaterFace, zero start value, marched over one measurement interval.
// Full trajectories including the zero start state.
std::vector<Trajectory> solve_basis_problems(const Mesh& mesh, const PhysicalParams& params,
                                             const TimeGrid& grid, const RbfBasis& basis,
                                             const OfflineOptions& options = {});

// Derivative problems: volumetric source -rho*c_p*T_phi_j, zero boundary flux,
// homogeneous Robin.  The source uses the previous-step basis field, which
// keeps the discrete ramp superposition identity exact.
std::vector<Trajectory> solve_derivative_problems(const Mesh& mesh, const PhysicalParams& params,
                                                  const TimeGrid& grid,
                                                  const std::vector<Trajectory>& t_phi,
                                                  const OfflineOptions& options = {});

DenseMatrix assemble_theta(const std::vector<Field>& finals,
                           const std::vector<std::int64_t>& probe_cells, double scale = 1.0);

// Orchestrates the whole offline phase: basis and derivative problems solved
// pairwise (bounded memory), response matrices and penalty Gram assembled.
OfflineData build_offline_data(const Mesh& mesh, const PhysicalParams& params,
                               const TimeGrid& grid, const RbfBasis& basis,
                               const SensorArray& sensors, const OfflineOptions& options = {});

void save_offline_archive(const std::string& path, const OfflineData& data);
// expected_fingerprint non-empty: mismatch raises InvalidState.
OfflineData load_offline_archive(const std::string& path,
                                 const std::string& expected_fingerprint = "");

// Disk-backed cache: load a matching archive from cache_dir or build and
// store one.  Empty cache_dir builds without persisting.
OfflineData get_or_build_offline(const std::string& cache_dir, const Mesh& mesh,
                                 const PhysicalParams& params, const TimeGrid& grid,
                                 const RbfBasis& basis, const SensorArray& sensors,
                                 const OfflineOptions& options = {});

}  // namespace moldflux
