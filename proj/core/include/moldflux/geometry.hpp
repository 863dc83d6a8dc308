#pragma once

#include <cmath>

#include "moldflux/errors.hpp"

namespace moldflux {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Axis-aligned slab domain [0,L] x [0,W] x [0,H].
// x runs along the casting direction, y through the slab thickness
// (heated face at y = 0, cooled face at y = W), z across the width.
struct Geometry {
  double L = 0.0;
  double W = 0.0;
  double H = 0.0;

  void validate() const {
    if (!(L > 0.0) || !(W > 0.0) || !(H > 0.0)) {
      throw InvalidArgument("Geometry: all extents must be positive");
    }
  }
  double volume() const { return L * W * H; }
};

}  // namespace moldflux
