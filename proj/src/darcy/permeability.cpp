#include "porous/darcy/permeability.hpp"

#include <cmath>
#include <string>

#include "porous/error.hpp"

namespace porous::darcy {

Partition grid_partition(const Rectangle& domain, int px, int py) {
  if (px < 1 || py < 1) {
    throw InvalidArgument("grid_partition: need at least one subdomain per axis");
  }
  Partition out;
  out.reserve(static_cast<std::size_t>(px) * py);
  const double wx = domain.width() / px;
  const double wy = domain.height() / py;
  for (int j = 0; j < py; ++j) {
    for (int i = 0; i < px; ++i) {
      const double x1 = (i + 1 == px) ? domain.x1 : domain.x0 + (i + 1) * wx;
      const double y1 = (j + 1 == py) ? domain.y1 : domain.y0 + (j + 1) * wy;
      out.push_back({domain.x0 + i * wx, domain.y0 + j * wy, x1, y1});
    }
  }
  return out;
}

PermeabilityField::PermeabilityField(Partition partition, std::vector<std::array<double, 2>> entries)
    : partition_(std::move(partition)), entries_(std::move(entries)) {
  if (partition_.empty()) {
    throw InvalidArgument("PermeabilityField: empty partition");
  }
  if (entries_.size() != partition_.size()) {
    throw InvalidArgument("PermeabilityField: " + std::to_string(entries_.size()) + " entries for " +
                          std::to_string(partition_.size()) + " subdomains");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (const double v : entries_[i]) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument("PermeabilityField: inverse permeability entry of subdomain " + std::to_string(i) +
                              " must be positive, got " + std::to_string(v));
      }
    }
  }
}

PermeabilityField PermeabilityField::uniform(Partition partition, double a, double b) {
  const std::size_t n = partition.size();
  return PermeabilityField(std::move(partition), std::vector<std::array<double, 2>>(n, {a, b}));
}

std::vector<int> PermeabilityField::cell_map(const StructuredQuadMesh& mesh) const {
  return map_cells_to_partition(mesh, partition_);
}

std::vector<double> PermeabilityField::flattened() const {
  std::vector<double> q;
  q.reserve(2 * entries_.size());
  for (const auto& e : entries_) {
    q.push_back(e[0]);
    q.push_back(e[1]);
  }
  return q;
}

std::vector<int> map_cells_to_partition(const StructuredQuadMesh& mesh, const Partition& partition) {
  const double tol = 1e-9 * std::min(mesh.hx(), mesh.hy());
  std::vector<int> map(mesh.num_cells(), -1);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Point2 o = mesh.cell_origin(c);
    const Point2 center = mesh.cell_center(c);
    int owner = -1;
    for (std::size_t s = 0; s < partition.size(); ++s) {
      const Rectangle& r = partition[s];
      if (!r.contains(center.x, center.y)) {
        continue;
      }
      if (owner >= 0) {
        throw InvalidArgument("partition: subdomains " + std::to_string(owner) + " and " + std::to_string(s) +
                              " overlap at cell " + std::to_string(c));
      }
      if (!r.contains(o.x, o.y, tol) || !r.contains(o.x + mesh.hx(), o.y + mesh.hy(), tol)) {
        throw InvalidArgument("partition: subdomain " + std::to_string(s) + " cuts through cell " +
                              std::to_string(c));
      }
      owner = static_cast<int>(s);
    }
    if (owner < 0) {
      throw InvalidArgument("partition: cell " + std::to_string(c) + " is not covered by any subdomain");
    }
    map[c] = owner;
  }
  return map;
}

}  // namespace porous::darcy
