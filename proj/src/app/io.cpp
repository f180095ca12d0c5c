#include "porous/app/io.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

#include "porous/error.hpp"

namespace porous::app {

using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void CsvTable::add(const std::vector<double>& row) {
  std::vector<std::string> cells;
  for (double x : row) {
    cells.push_back(format_double(x));
  }
  add_text(std::move(cells));
}

void CsvTable::add_text(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw InvalidArgument("CsvTable: row width does not match the header");
  }
  rows.push_back(std::move(row));
}

void CsvTable::write(const fs::path& path) const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out += (c ? "," : "") + columns[c];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) {
        out += ',';
      }
      out += row[c];
    }
    out += '\n';
  }
  write_text(path, out);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    throw InvalidArgument("cannot write " + path.string());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw InvalidArgument("cannot read " + path.string());
  }
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": malformed JSON: " + e.what());
  }
}

json pack_to_json(const pore::SpherePack& pack) {
  json centers = json::array();
  for (const auto& c : pack.centers) {
    centers.push_back(c);
  }
  return {{"box", pack.box}, {"diameter", pack.diameter}, {"seed", pack.seed}, {"centers", centers}};
}

pore::SpherePack pack_from_json(const json& j) {
  const auto bad = [](const std::string& what) { throw InvalidArgument("pack file: " + what); };
  if (!j.is_object()) {
    bad("expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "box" && key != "diameter" && key != "seed" && key != "centers") {
      bad("unknown field " + key);
    }
  }
  const auto vec3 = [&](const json& v) {
    if (!v.is_array() || v.size() != 3) {
      bad("expected a 3-vector");
    }
    pore::Vec3 out{};
    for (int a = 0; a < 3; ++a) {
      if (!v[a].is_number()) {
        bad("expected a number");
      }
      out[a] = v[a].get<double>();
    }
    return out;
  };
  if (!j.contains("box") || !j.contains("diameter") || !j.contains("centers") || !j["diameter"].is_number() ||
      !j["centers"].is_array()) {
    bad("box, diameter and centers are required");
  }
  pore::SpherePack p;
  p.box = vec3(j["box"]);
  p.diameter = j["diameter"].get<double>();
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      bad("seed must be an integer");
    }
    p.seed = j["seed"].get<std::uint64_t>();
  }
  for (const auto& c : j["centers"]) {
    p.centers.push_back(vec3(c));
  }
  p.validate();
  return p;
}

void write_field(const fs::path& path, const pore::StokesField& field) {
  static_assert(std::endian::native == std::endian::little, "field dumps assume a little-endian host");
  std::ofstream f(path, std::ios::binary);
  const auto put = [&](const std::vector<double>& v) {
    f.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  for (const auto& c : field.velocity) {
    put(c);
  }
  put(field.pressure);
  if (!f) {
    throw InvalidArgument("cannot write " + path.string());
  }
  json side = {{"dims", field.n},
               {"spacing", field.spacing},
               {"dtype", "float64"},
               {"endianness", "little"},
               {"order", "x fastest, then y, then z"},
               {"components",
                json::array({{{"name", "u_x"}, {"location", "low x-face"}},
                             {{"name", "u_y"}, {"location", "low y-face"}},
                             {{"name", "u_z"}, {"location", "low z-face"}},
                             {{"name", "p"}, {"location", "cell centre"}}})},
               {"viscosity", field.viscosity},
               {"gradient", field.gradient},
               {"iterations", field.iterations}};
  write_json(fs::path(path.string() + ".json"), side);
}

void write_histogram(const fs::path& path, const pore::VelocityHistogram& h) {
  CsvTable t{{"bin_left", "bin_right", "pdf"}, {}};
  for (int b = 0; b < h.spec.bins; ++b) {
    t.add({h.spec.lower + b * h.spec.width, h.spec.lower + (b + 1) * h.spec.width, h.pdf[b]});
  }
  t.write(path);
}

void write_darcy_state(const fs::path& path, const darcy::StructuredQuadMesh& mesh, const darcy::FemState& state) {
  CsvTable t{{"vertex", "x", "y", "u_x", "u_y", "p"}, {}};
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const darcy::Point2 x = mesh.vertex(v);
    t.add({double(v), x.x, x.y, state.ux(v), state.uy(v), state.pressure[v]});
  }
  t.write(path);
}

json darcy_header(const darcy::StructuredQuadMesh& mesh, const darcy::PermeabilityField& perm) {
  json parts = json::array();
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const auto& r = perm.partition()[i];
    parts.push_back({{"rectangle", {r.x0, r.y0, r.x1, r.y1}}, {"inverse_permeability", perm.entries()[i]}});
  }
  const auto& d = mesh.domain();
  return {{"nx", mesh.nx()},
          {"ny", mesh.ny()},
          {"domain", {d.x0, d.y0, d.x1, d.y1}},
          {"vertices", mesh.num_vertices()},
          {"columns", {"vertex", "x", "y", "u_x", "u_y", "p"}},
          {"subdomains", parts}};
}

}  // namespace porous::app
