#include "moldflux/vtk.hpp"

#include <cstdio>

#include "moldflux/csv.hpp"
#include "moldflux/errors.hpp"

namespace moldflux {

void write_vtk_field(const std::string& path, const Mesh& mesh, const Field& field,
                     const std::string& field_name, const std::string& title) {
  if (field.size() != static_cast<std::size_t>(mesh.num_cells())) {
    throw InvalidArgument("write_vtk_field: field size differs from cell count");
  }
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw InvalidState("write_vtk_field: cannot open " + path);

  std::fprintf(f, "# vtk DataFile Version 3.0\n%s\nASCII\n", title.c_str());
  std::fprintf(f, "DATASET STRUCTURED_POINTS\n");
  // Point dimensions; the field lives on the cells between them.
  std::fprintf(f, "DIMENSIONS %lld %lld %lld\n", static_cast<long long>(mesh.nx + 1),
               static_cast<long long>(mesh.ny + 1), static_cast<long long>(mesh.nz + 1));
  std::fprintf(f, "ORIGIN 0 0 0\n");
  std::fprintf(f, "SPACING %s %s %s\n", format_full(mesh.dx).c_str(),
               format_full(mesh.dy).c_str(), format_full(mesh.dz).c_str());
  std::fprintf(f, "CELL_DATA %lld\n", static_cast<long long>(mesh.num_cells()));
  std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", field_name.c_str());
  for (double v : field) std::fprintf(f, "%s\n", format_full(v).c_str());
  std::fclose(f);
}

void write_field_csv(const std::string& path, const Mesh& mesh, const Field& field,
                     const std::string& value_column,
                     const std::vector<std::string>& header_comments) {
  if (field.size() != static_cast<std::size_t>(mesh.num_cells())) {
    throw InvalidArgument("write_field_csv: field size differs from cell count");
  }
  CsvWriter csv(path, header_comments, {"cell", "x_m", "y_m", "z_m", value_column});
  for (std::size_t c = 0; c < field.size(); ++c) {
    csv.begin_row();
    csv.add(static_cast<long long>(c));
    csv.add(mesh.cell_centers[c].x);
    csv.add(mesh.cell_centers[c].y);
    csv.add(mesh.cell_centers[c].z);
    csv.add(field[c]);
    csv.end_row();
  }
}

}  // namespace moldflux
