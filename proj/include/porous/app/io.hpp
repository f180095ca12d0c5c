#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "porous/darcy/fem.hpp"
#include "porous/pore/pack.hpp"
#include "porous/pore/pdf.hpp"
#include "porous/pore/stokes.hpp"

namespace porous::app {

namespace fs = std::filesystem;

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

/// Header row plus rows; numbers are written with format_double.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(const std::vector<double>& row);
  void add_text(std::vector<std::string> row);
  void write(const fs::path& path) const;
};

/// Throws InvalidArgument (with the path) when the file cannot be written.
void write_text(const fs::path& path, const std::string& text);
void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

/// {"box": [...], "diameter": D, "seed": s, "centers": [[x, y, z], ...]}.
nlohmann::json pack_to_json(const pore::SpherePack& pack);
/// Strict inverse of pack_to_json; validates the pack.
pore::SpherePack pack_from_json(const nlohmann::json& j);

/// Flat little-endian float64 dump of u_x, u_y, u_z (face values) and p, each
/// nx * ny * nz values with x fastest, followed by a JSON sidecar <path>.json.
void write_field(const fs::path& path, const pore::StokesField& field);

/// bin_left, bin_right, pdf.
void write_histogram(const fs::path& path, const pore::VelocityHistogram& h);

/// Vertex table (vertex id, x, y, u_x, u_y, p).
void write_darcy_state(const fs::path& path, const darcy::StructuredQuadMesh& mesh, const darcy::FemState& state);
/// Mesh dims, partition rectangles and permeability entries.
nlohmann::json darcy_header(const darcy::StructuredQuadMesh& mesh, const darcy::PermeabilityField& perm);

}  // namespace porous::app
