#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dfm2d/grid.hpp"

namespace dfm {

/// Write a grid with named per-cell fields as a VTK legacy ASCII file.
void write_vtk(const Grid& g, const std::string& path,
               const std::map<std::string, Eigen::VectorXd>& cell_fields = {});

/// Parse Gmsh MSH 2.2 ASCII text into a 2d grid. Supported element types:
/// 1 (2-node line, tagged as fracture faces by physical group), 2 (triangle),
/// 15 (point, ignored). The physical tag of line elements minus one is used
/// as the fracture id. Throws MeshError with a line number on malformed input.
Grid import_msh(const std::string& text);
Grid import_msh_file(const std::string& path);

/// Write a 2d grid as MSH 2.2 ASCII; tagged fracture faces become line
/// elements with physical tag fracture_id + 1.
std::string export_msh(const Grid& g);

}  // namespace dfm
