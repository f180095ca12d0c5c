#pragma once

#include <array>
#include <span>
#include <vector>

#include "porous/darcy/mesh.hpp"

namespace porous::darcy {

/// Disjoint rectangles tiling the domain.
using Partition = std::vector<Rectangle>;

/// px x py equal rectangles, numbered row by row from the lower left (x fastest).
Partition grid_partition(const Rectangle& domain, int px, int py);

/// Piecewise-constant diagonal inverse permeability diag(a_i, b_i) on each
/// subdomain of a partition.
class PermeabilityField {
 public:
  /// Throws InvalidArgument unless every entry is strictly positive and the
  /// entry count matches the partition.
  PermeabilityField(Partition partition, std::vector<std::array<double, 2>> entries);

  static PermeabilityField uniform(Partition partition, double a, double b);

  const Partition& partition() const { return partition_; }
  const std::vector<std::array<double, 2>>& entries() const { return entries_; }
  std::size_t size() const { return partition_.size(); }

  /// Subdomain index of every mesh cell. Throws InvalidArgument when a cell is
  /// not contained in exactly one subdomain or the subdomains do not cover the mesh.
  std::vector<int> cell_map(const StructuredQuadMesh& mesh) const;

  /// Entries flattened as (a_1, b_1, a_2, b_2, ...).
  std::vector<double> flattened() const;

 private:
  Partition partition_;
  std::vector<std::array<double, 2>> entries_;
};

/// Subdomain index of every cell; shared by assembly and parameter maps.
std::vector<int> map_cells_to_partition(const StructuredQuadMesh& mesh, const Partition& partition);

}  // namespace porous::darcy
