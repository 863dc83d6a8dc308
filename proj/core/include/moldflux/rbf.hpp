#pragma once

#include <cstdint>
#include <vector>

#include "moldflux/dense.hpp"
#include "moldflux/mesh.hpp"

namespace moldflux {

// Pointwise interior temperature probes.
struct SensorArray {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  void validate(const Geometry& g) const;
  // Smallest pairwise distance between sensors.
  double min_spacing() const;
};

// Regular count_x * count_z probe grid at depth y, inset half a pitch from
// the domain edges.
SensorArray make_sensor_grid(const Geometry& g, std::int64_t count_x, std::int64_t count_z,
                             double y);

// Gaussian radial basis phi_j(p) = exp(-(eta*|p - center_j|)^2) on the
// HotFace plane y = 0.
struct RbfBasis {
  std::vector<Vec3> centers;
  double eta = 0.0;

  std::size_t size() const { return centers.size(); }
  void validate() const;
};

// Centers are the sensors projected onto the HotFace plane (drop y).
RbfBasis make_rbf_basis(const SensorArray& sensors, const Geometry& g, double eta);
// Default shape parameter 2/d_min from the projected center spacing.
double default_eta(const SensorArray& sensors, const Geometry& g);

double eval_rbf(const RbfBasis& basis, std::size_t j, const Vec3& p);

enum class TimeBasis : std::uint8_t { Constant, Linear };
const char* time_basis_name(TimeBasis b);

// Weights per measurement interval: w[k-1][i] scales phi_i on (tau_{k-1}, tau_k].
// With the Linear time basis the flux ramps from the previous interval's
// weights (w0 before the first interval), continuous at interval ends.
struct WeightsTimeline {
  TimeBasis time_basis = TimeBasis::Constant;
  double f_samp = 1.0;
  std::vector<double> w0;               // Linear only: weights at t = 0
  std::vector<std::vector<double>> w;   // [num_meas][P]

  std::size_t num_intervals() const { return w.size(); }
  void validate(std::size_t P) const;
};

// Flux value sum_i g_i^k(t) phi_i(x) for t in (tau_{k-1}, tau_k]; t = 0 uses
// the initial weights.  Throws OutOfDomain outside [0, tau_last].
double eval_flux(const RbfBasis& basis, const WeightsTimeline& timeline, const Vec3& p, double t);

// phi_j sampled at the HotFace face centers of the mesh; row j, column = face.
DenseMatrix basis_face_values(const RbfBasis& basis, const HotFaceTable& hot);

// Penalty Gram matrix Phi_{rs} = integral of phi_r phi_s over the HotFace,
// midpoint rule on the mesh's boundary faces.  Symmetric PSD.
DenseMatrix assemble_phi_matrix(const RbfBasis& basis, const Mesh& mesh);
DenseMatrix assemble_phi_matrix(const RbfBasis& basis, const HotFaceTable& hot);

}  // namespace moldflux
