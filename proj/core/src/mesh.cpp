#include "moldflux/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace moldflux {

const char* patch_name(BoundaryPatch p) {
  switch (p) {
    case BoundaryPatch::None: return "none";
    case BoundaryPatch::HotFace: return "hot_face";
    case BoundaryPatch::Exterior: return "exterior";
    case BoundaryPatch::WaterFace: return "water_face";
  }
  return "?";
}

double Mesh::characteristic_size() const {
  return std::max(dx, std::max(dy, dz));
}

Mesh build_structured_mesh(const Geometry& g, std::int64_t nx, std::int64_t ny, std::int64_t nz) {
  g.validate();
  if (nx < 1 || ny < 1 || nz < 1) {
    throw InvalidArgument("build_structured_mesh: cell counts must be >= 1");
  }
  Mesh m;
  m.geometry = g;
  m.nx = nx;
  m.ny = ny;
  m.nz = nz;
  m.dx = g.L / static_cast<double>(nx);
  m.dy = g.W / static_cast<double>(ny);
  m.dz = g.H / static_cast<double>(nz);

  const std::int64_t n = nx * ny * nz;
  m.cell_centers.resize(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < nz; ++k) {
    for (std::int64_t j = 0; j < ny; ++j) {
      for (std::int64_t i = 0; i < nx; ++i) {
        m.cell_centers[static_cast<std::size_t>(m.cell_index(i, j, k))] = {
            (static_cast<double>(i) + 0.5) * m.dx,
            (static_cast<double>(j) + 0.5) * m.dy,
            (static_cast<double>(k) + 0.5) * m.dz};
      }
    }
  }

  const double ax = m.dy * m.dz;  // area of faces with normal along x
  const double ay = m.dx * m.dz;
  const double az = m.dx * m.dy;
  const std::int64_t n_interior = (nx - 1) * ny * nz + nx * (ny - 1) * nz + nx * ny * (nz - 1);
  const std::int64_t n_boundary = 2 * (ny * nz + nx * nz + nx * ny);
  m.faces.reserve(static_cast<std::size_t>(n_interior + n_boundary));

  auto center_of = [&](std::int64_t c) { return m.cell_centers[static_cast<std::size_t>(c)]; };

  // Interior faces, owner is the lower-index cell.
  for (std::int64_t k = 0; k < nz; ++k)
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i + 1 < nx; ++i) {
        const std::int64_t c = m.cell_index(i, j, k);
        Face f;
        f.owner = c;
        f.neighbor = m.cell_index(i + 1, j, k);
        f.area = ax;
        f.normal = {1.0, 0.0, 0.0};
        f.center = center_of(c) + Vec3{0.5 * m.dx, 0.0, 0.0};
        m.faces.push_back(f);
      }
  for (std::int64_t k = 0; k < nz; ++k)
    for (std::int64_t j = 0; j + 1 < ny; ++j)
      for (std::int64_t i = 0; i < nx; ++i) {
        const std::int64_t c = m.cell_index(i, j, k);
        Face f;
        f.owner = c;
        f.neighbor = m.cell_index(i, j + 1, k);
        f.area = ay;
        f.normal = {0.0, 1.0, 0.0};
        f.center = center_of(c) + Vec3{0.0, 0.5 * m.dy, 0.0};
        m.faces.push_back(f);
      }
  for (std::int64_t k = 0; k + 1 < nz; ++k)
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i < nx; ++i) {
        const std::int64_t c = m.cell_index(i, j, k);
        Face f;
        f.owner = c;
        f.neighbor = m.cell_index(i, j, k + 1);
        f.area = az;
        f.normal = {0.0, 0.0, 1.0};
        f.center = center_of(c) + Vec3{0.0, 0.0, 0.5 * m.dz};
        m.faces.push_back(f);
      }

  auto push_boundary = [&](std::int64_t c, double area, Vec3 normal, Vec3 center,
                           BoundaryPatch patch) {
    Face f;
    f.owner = c;
    f.neighbor = -1;
    f.area = area;
    f.normal = normal;
    f.center = center;
    f.patch = patch;
    m.faces.push_back(f);
  };

  // y = 0 (HotFace) and y = W (WaterFace)
  for (std::int64_t k = 0; k < nz; ++k)
    for (std::int64_t i = 0; i < nx; ++i) {
      const std::int64_t c0 = m.cell_index(i, 0, k);
      push_boundary(c0, ay, {0.0, -1.0, 0.0},
                    center_of(c0) - Vec3{0.0, 0.5 * m.dy, 0.0}, BoundaryPatch::HotFace);
      const std::int64_t c1 = m.cell_index(i, ny - 1, k);
      push_boundary(c1, ay, {0.0, 1.0, 0.0},
                    center_of(c1) + Vec3{0.0, 0.5 * m.dy, 0.0}, BoundaryPatch::WaterFace);
    }
  // x = 0 and x = L (Exterior)
  for (std::int64_t k = 0; k < nz; ++k)
    for (std::int64_t j = 0; j < ny; ++j) {
      const std::int64_t c0 = m.cell_index(0, j, k);
      push_boundary(c0, ax, {-1.0, 0.0, 0.0},
                    center_of(c0) - Vec3{0.5 * m.dx, 0.0, 0.0}, BoundaryPatch::Exterior);
      const std::int64_t c1 = m.cell_index(nx - 1, j, k);
      push_boundary(c1, ax, {1.0, 0.0, 0.0},
                    center_of(c1) + Vec3{0.5 * m.dx, 0.0, 0.0}, BoundaryPatch::Exterior);
    }
  // z = 0 and z = H (Exterior)
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i) {
      const std::int64_t c0 = m.cell_index(i, j, 0);
      push_boundary(c0, az, {0.0, 0.0, -1.0},
                    center_of(c0) - Vec3{0.0, 0.0, 0.5 * m.dz}, BoundaryPatch::Exterior);
      const std::int64_t c1 = m.cell_index(i, j, nz - 1);
      push_boundary(c1, az, {0.0, 0.0, 1.0},
                    center_of(c1) + Vec3{0.0, 0.0, 0.5 * m.dz}, BoundaryPatch::Exterior);
    }

  return m;
}

namespace {

// 1-D index with the tie rule: coordinates on an internal grid plane belong
// to the lower cell.
std::int64_t axis_index(double v, double extent, double spacing, std::int64_t n,
                        const char* axis) {
  if (v < 0.0 || v > extent) {
    throw OutOfDomain(std::string("locate_cell: coordinate outside domain on axis ") + axis);
  }
  auto idx = static_cast<std::int64_t>(std::floor(v / spacing));
  if (idx >= n) idx = n - 1;
  if (idx > 0 && static_cast<double>(idx) * spacing == v) --idx;
  return idx;
}

}  // namespace

std::int64_t locate_cell(const Mesh& mesh, const Vec3& p) {
  const std::int64_t i = axis_index(p.x, mesh.geometry.L, mesh.dx, mesh.nx, "x");
  const std::int64_t j = axis_index(p.y, mesh.geometry.W, mesh.dy, mesh.ny, "y");
  const std::int64_t k = axis_index(p.z, mesh.geometry.H, mesh.dz, mesh.nz, "z");
  return mesh.cell_index(i, j, k);
}

HotFaceTable hot_face_table(const Mesh& mesh) {
  HotFaceTable t;
  const auto n_hot = static_cast<std::size_t>(mesh.nx * mesh.nz);
  t.cell.reserve(n_hot);
  t.area.reserve(n_hot);
  t.center.reserve(n_hot);
  for (const Face& f : mesh.faces) {
    if (f.patch == BoundaryPatch::HotFace) {
      t.cell.push_back(f.owner);
      t.area.push_back(f.area);
      t.center.push_back(f.center);
    }
  }
  return t;
}

std::string mesh_metadata(const Mesh& mesh) {
  std::ostringstream os;
  os << "mesh " << mesh.nx << "x" << mesh.ny << "x" << mesh.nz
     << " cells=" << mesh.num_cells()
     << " dx=" << mesh.dx << " dy=" << mesh.dy << " dz=" << mesh.dz
     << " domain=" << mesh.geometry.L << "x" << mesh.geometry.W << "x" << mesh.geometry.H;
  return os.str();
}

}  // namespace moldflux
