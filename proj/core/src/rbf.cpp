#include "moldflux/rbf.hpp"

#include <cmath>
#include <limits>

namespace moldflux {

void SensorArray::validate(const Geometry& g) const {
  if (points.empty()) throw InvalidArgument("SensorArray: at least one sensor required");
  for (const Vec3& p : points) {
    if (p.x <= 0.0 || p.x >= g.L || p.y <= 0.0 || p.y >= g.W || p.z <= 0.0 || p.z >= g.H) {
      throw OutOfDomain("SensorArray: sensors must lie strictly inside the domain");
    }
  }
}

double SensorArray::min_spacing() const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      d = std::min(d, norm(points[a] - points[b]));
    }
  }
  return d;
}

SensorArray make_sensor_grid(const Geometry& g, std::int64_t count_x, std::int64_t count_z,
                             double y) {
  if (count_x < 1 || count_z < 1) {
    throw InvalidArgument("make_sensor_grid: counts must be >= 1");
  }
  if (y <= 0.0 || y >= g.W) {
    throw InvalidArgument("make_sensor_grid: probe depth must be inside (0, W)");
  }
  SensorArray s;
  const double px = g.L / static_cast<double>(count_x);
  const double pz = g.H / static_cast<double>(count_z);
  s.points.reserve(static_cast<std::size_t>(count_x * count_z));
  for (std::int64_t j = 0; j < count_z; ++j) {
    for (std::int64_t i = 0; i < count_x; ++i) {
      s.points.push_back({(static_cast<double>(i) + 0.5) * px, y,
                          (static_cast<double>(j) + 0.5) * pz});
    }
  }
  return s;
}

void RbfBasis::validate() const {
  if (centers.empty()) throw InvalidArgument("RbfBasis: no centers");
  if (!(eta > 0.0)) throw InvalidArgument("RbfBasis: eta must be positive");
  for (std::size_t a = 0; a < centers.size(); ++a) {
    for (std::size_t b = a + 1; b < centers.size(); ++b) {
      if (norm(centers[a] - centers[b]) == 0.0) {
        throw InvalidArgument("RbfBasis: duplicate centers");
      }
    }
  }
}

RbfBasis make_rbf_basis(const SensorArray& sensors, const Geometry& g, double eta) {
  sensors.validate(g);
  RbfBasis basis;
  basis.eta = eta;
  basis.centers.reserve(sensors.size());
  for (const Vec3& p : sensors.points) {
    basis.centers.push_back({p.x, 0.0, p.z});
  }
  basis.validate();
  return basis;
}

double default_eta(const SensorArray& sensors, const Geometry& g) {
  RbfBasis projected = make_rbf_basis(sensors, g, 1.0);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < projected.centers.size(); ++a) {
    for (std::size_t b = a + 1; b < projected.centers.size(); ++b) {
      d = std::min(d, norm(projected.centers[a] - projected.centers[b]));
    }
  }
  if (!std::isfinite(d) || d == 0.0) {
    throw InvalidArgument("default_eta: needs at least two distinct centers");
  }
  return 2.0 / d;
}

double eval_rbf(const RbfBasis& basis, std::size_t j, const Vec3& p) {
  const Vec3 d = p - basis.centers[j];
  const double r2 = dot(d, d);
  return std::exp(-(basis.eta * basis.eta) * r2);
}

const char* time_basis_name(TimeBasis b) {
  return b == TimeBasis::Constant ? "constant" : "linear";
}

void WeightsTimeline::validate(std::size_t P) const {
  if (w.empty()) throw InvalidArgument("WeightsTimeline: no intervals");
  for (const auto& wk : w) {
    if (wk.size() != P) throw InvalidArgument("WeightsTimeline: weight count mismatch");
  }
  if (time_basis == TimeBasis::Linear && w0.size() != P) {
    throw InvalidArgument("WeightsTimeline: initial weights required for the linear basis");
  }
  if (!(f_samp > 0.0)) throw InvalidArgument("WeightsTimeline: f_samp must be positive");
}

double eval_flux(const RbfBasis& basis, const WeightsTimeline& timeline, const Vec3& p,
                 double t) {
  const std::size_t P = basis.size();
  if (timeline.w.empty() || timeline.w.front().size() != P) {
    throw InvalidArgument("eval_flux: timeline does not match the basis");
  }
  const double meas_dt = 1.0 / timeline.f_samp;
  const double t_last = static_cast<double>(timeline.w.size()) * meas_dt;
  if (t < 0.0 || t > t_last * (1.0 + 1e-12)) {
    throw OutOfDomain("eval_flux: time outside the covered range");
  }

  // Interval index k with t in (tau_{k-1}, tau_k]; t = 0 belongs to the
  // opening of the first interval.
  auto k = static_cast<std::int64_t>(std::ceil(t / meas_dt - 1e-12));
  if (k < 1) k = 1;
  if (k > static_cast<std::int64_t>(timeline.w.size())) {
    k = static_cast<std::int64_t>(timeline.w.size());
  }
  const std::vector<double>& wk = timeline.w[static_cast<std::size_t>(k - 1)];

  double acc = 0.0;
  if (timeline.time_basis == TimeBasis::Constant) {
    for (std::size_t i = 0; i < P; ++i) {
      if (wk[i] != 0.0) acc += wk[i] * eval_rbf(basis, i, p);
    }
    return acc;
  }
  const std::vector<double>& prev = (k == 1) ? timeline.w0 : timeline.w[static_cast<std::size_t>(k - 2)];
  const double tau_prev = static_cast<double>(k - 1) * meas_dt;
  const double theta = (t - tau_prev) / meas_dt;  // ramp fraction in [0, 1]
  for (std::size_t i = 0; i < P; ++i) {
    const double gi = prev[i] + theta * (wk[i] - prev[i]);
    if (gi != 0.0) acc += gi * eval_rbf(basis, i, p);
  }
  return acc;
}

DenseMatrix basis_face_values(const RbfBasis& basis, const HotFaceTable& hot) {
  DenseMatrix B(basis.size(), hot.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    for (std::size_t f = 0; f < hot.size(); ++f) {
      B.at(j, f) = eval_rbf(basis, j, hot.center[f]);
    }
  }
  return B;
}

DenseMatrix assemble_phi_matrix(const RbfBasis& basis, const HotFaceTable& hot) {
  basis.validate();
  const DenseMatrix B = basis_face_values(basis, hot);
  const std::size_t P = basis.size();
  DenseMatrix Phi(P, P);
  for (std::size_t r = 0; r < P; ++r) {
    for (std::size_t s = r; s < P; ++s) {
      double acc = 0.0;
      for (std::size_t f = 0; f < hot.size(); ++f) {
        acc += B.at(r, f) * B.at(s, f) * hot.area[f];
      }
      Phi.at(r, s) = acc;
      Phi.at(s, r) = acc;
    }
  }
  return Phi;
}

DenseMatrix assemble_phi_matrix(const RbfBasis& basis, const Mesh& mesh) {
  return assemble_phi_matrix(basis, hot_face_table(mesh));
}

}  // namespace moldflux
