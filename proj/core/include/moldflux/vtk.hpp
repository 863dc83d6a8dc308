#pragma once

#include <string>
#include <vector>

#include "moldflux/mesh.hpp"
#include "moldflux/sparse.hpp"

namespace moldflux {

// Legacy ASCII structured-points file with one cell-centered scalar field.
void write_vtk_field(const std::string& path, const Mesh& mesh, const Field& field,
                     const std::string& field_name, const std::string& title = "moldflux field");

// Long-format dump (cell, x, y, z, value), full precision.
void write_field_csv(const std::string& path, const Mesh& mesh, const Field& field,
                     const std::string& value_column = "T_K",
                     const std::vector<std::string>& header_comments = {});

}  // namespace moldflux
