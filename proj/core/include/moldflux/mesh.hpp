#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moldflux/geometry.hpp"

namespace moldflux {

// Boundary patches of the slab.  HotFace carries the unknown Neumann flux,
// WaterFace a Robin condition, Exterior is adiabatic.
enum class BoundaryPatch : std::uint8_t {
  None = 0,      // interior face
  HotFace,       // y = 0
  Exterior,      // x = 0, x = L, z = 0, z = H
  WaterFace,     // y = W
};

const char* patch_name(BoundaryPatch p);

struct Face {
  std::int64_t owner = -1;
  std::int64_t neighbor = -1;  // -1 on boundary faces
  double area = 0.0;
  Vec3 normal;                 // unit outward normal w.r.t. owner
  Vec3 center;
  BoundaryPatch patch = BoundaryPatch::None;
};

// Uniform structured hexahedral mesh of the slab.  Cell (i,j,k) has linear
// index i + nx*j + nx*ny*k; i along x, j along y, k along z.
struct Mesh {
  Geometry geometry;
  std::int64_t nx = 0, ny = 0, nz = 0;
  double dx = 0.0, dy = 0.0, dz = 0.0;
  std::vector<Vec3> cell_centers;
  std::vector<Face> faces;  // interior faces first, then boundary faces

  std::int64_t num_cells() const { return nx * ny * nz; }
  std::int64_t cell_index(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return i + nx * (j + ny * k);
  }
  double cell_volume() const { return dx * dy * dz; }
  // Characteristic size: the largest cell edge.
  double characteristic_size() const;
  double hot_face_area() const { return geometry.L * geometry.H; }
};

Mesh build_structured_mesh(const Geometry& g, std::int64_t nx, std::int64_t ny, std::int64_t nz);

// Index of the cell containing p.  Points on internal grid planes resolve to
// the lower-index cell; points outside the closed domain throw OutOfDomain.
std::int64_t locate_cell(const Mesh& mesh, const Vec3& p);

// Owner cells, areas, and centers of the HotFace boundary faces, in face order.
struct HotFaceTable {
  std::vector<std::int64_t> cell;
  std::vector<double> area;
  std::vector<Vec3> center;
  std::size_t size() const { return cell.size(); }
};
HotFaceTable hot_face_table(const Mesh& mesh);

// Short description (counts, spacings, patch areas) for output-file headers.
std::string mesh_metadata(const Mesh& mesh);

}  // namespace moldflux
