#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "porous/pore/pack.hpp"

namespace porous::pore {

/// Cell-centred voxelization of a periodic box. Cell (i, j, k) has index
/// i + nx (j + ny k); mask value 1 marks fluid.
struct VoxelGrid {
  std::array<int, 3> n{};
  Vec3 spacing{};
  int cells_per_diameter = 0;
  std::vector<std::uint8_t> fluid;

  std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) * (j + static_cast<std::size_t>(n[1]) * k);
  }
  bool is_fluid(int i, int j, int k) const { return fluid[index(i, j, k)] != 0; }
  double cell_volume() const { return spacing[0] * spacing[1] * spacing[2]; }
  Vec3 box() const { return {n[0] * spacing[0], n[1] * spacing[1], n[2] * spacing[2]}; }
  std::size_t fluid_cells() const;
  /// Fluid cell fraction.
  double porosity() const;
};

/// Bytes needed by voxelize and solve_stokes for a grid of the given size.
std::size_t estimated_memory(std::size_t cells);

/// Cells per axis are round(L_a / D * cells_per_diameter), so the spacing can
/// differ slightly between axes when an edge is not a whole number of cells.
/// A cell is solid iff its centre lies inside a periodically wrapped sphere.
/// Throws InvalidArgument for cells_per_diameter < 4 or when the memory
/// estimate exceeds memory_cap_bytes.
VoxelGrid voxelize(const SpherePack& pack, int cells_per_diameter, std::size_t memory_cap_bytes = std::size_t{4} << 30);

/// Fluid grid with the given mask, for hand-built geometries.
VoxelGrid make_grid(std::array<int, 3> n, Vec3 spacing, std::vector<std::uint8_t> fluid);

/// True if some fluid path crosses the periodic box along `axis` (the fluid
/// component has non-zero winding number along that axis).
bool percolates(const VoxelGrid& grid, int axis);

/// Mirror image of the grid under x -> -x (cell i -> nx - 1 - i).
VoxelGrid mirror_x(const VoxelGrid& grid);

}  // namespace porous::pore
