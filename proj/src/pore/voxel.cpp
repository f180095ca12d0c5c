#include "porous/pore/voxel.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "porous/error.hpp"

namespace porous::pore {

std::size_t VoxelGrid::fluid_cells() const {
  std::size_t count = 0;
  for (auto f : fluid) {
    count += f != 0 ? 1 : 0;
  }
  return count;
}

double VoxelGrid::porosity() const { return static_cast<double>(fluid_cells()) / static_cast<double>(size()); }

std::size_t estimated_memory(std::size_t cells) {
  // mask, index maps, assembled operators and solver work vectors
  return cells * 1024;
}

VoxelGrid make_grid(std::array<int, 3> n, Vec3 spacing, std::vector<std::uint8_t> fluid) {
  for (int a = 0; a < 3; ++a) {
    if (n[a] < 1 || !(spacing[a] > 0.0)) {
      throw InvalidArgument("voxel grid: cell counts and spacings must be positive");
    }
  }
  VoxelGrid g;
  g.n = n;
  g.spacing = spacing;
  if (fluid.size() != g.size()) {
    throw InvalidArgument("voxel grid: mask has " + std::to_string(fluid.size()) + " entries, expected " +
                          std::to_string(g.size()));
  }
  g.fluid = std::move(fluid);
  return g;
}

VoxelGrid voxelize(const SpherePack& pack, int cells_per_diameter, std::size_t memory_cap_bytes) {
  if (cells_per_diameter < 4) {
    throw InvalidArgument("voxelize: need at least 4 cells per diameter, got " + std::to_string(cells_per_diameter));
  }
  pack.validate();
  VoxelGrid g;
  g.cells_per_diameter = cells_per_diameter;
  std::size_t total = 1;
  for (int a = 0; a < 3; ++a) {
    g.n[a] = std::max(1, static_cast<int>(std::lround(pack.box[a] / pack.diameter * cells_per_diameter)));
    g.spacing[a] = pack.box[a] / g.n[a];
    total *= static_cast<std::size_t>(g.n[a]);
  }
  const std::size_t need = estimated_memory(total);
  if (need > memory_cap_bytes) {
    throw InvalidArgument("voxelize: grid of " + std::to_string(g.n[0]) + "x" + std::to_string(g.n[1]) + "x" +
                          std::to_string(g.n[2]) + " cells needs about " + std::to_string(need >> 20) +
                          " MiB, above the cap of " + std::to_string(memory_cap_bytes >> 20) + " MiB");
  }
  g.fluid.assign(total, 1);
  const double r = 0.5 * pack.diameter;
  for (const Vec3& c : pack.centers) {
    std::array<int, 3> lo{};
    std::array<int, 3> hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = static_cast<int>(std::floor((c[a] - r) / g.spacing[a] - 0.5)) - 1;
      hi[a] = static_cast<int>(std::ceil((c[a] + r) / g.spacing[a] - 0.5)) + 1;
    }
    for (int k = lo[2]; k <= hi[2]; ++k) {
      const double dz = (k + 0.5) * g.spacing[2] - c[2];
      const int kw = ((k % g.n[2]) + g.n[2]) % g.n[2];
      for (int j = lo[1]; j <= hi[1]; ++j) {
        const double dy = (j + 0.5) * g.spacing[1] - c[1];
        const int jw = ((j % g.n[1]) + g.n[1]) % g.n[1];
        for (int i = lo[0]; i <= hi[0]; ++i) {
          const double dx = (i + 0.5) * g.spacing[0] - c[0];
          if (dx * dx + dy * dy + dz * dz < r * r) {
            const int iw = ((i % g.n[0]) + g.n[0]) % g.n[0];
            g.fluid[g.index(iw, jw, kw)] = 0;
          }
        }
      }
    }
  }
  return g;
}

bool percolates(const VoxelGrid& grid, int axis) {
  if (axis < 0 || axis > 2) {
    throw InvalidArgument("percolates: axis must be 0, 1 or 2");
  }
  constexpr int kUnvisited = std::numeric_limits<int>::min();
  std::vector<int> lap(grid.size(), kUnvisited);
  const auto& n = grid.n;
  for (std::size_t start = 0; start < grid.size(); ++start) {
    if (grid.fluid[start] == 0 || lap[start] != kUnvisited) {
      continue;
    }
    lap[start] = 0;
    std::deque<std::size_t> queue{start};
    while (!queue.empty()) {
      const std::size_t c = queue.front();
      queue.pop_front();
      const int ijk[3] = {static_cast<int>(c % n[0]), static_cast<int>((c / n[0]) % n[1]),
                          static_cast<int>(c / (static_cast<std::size_t>(n[0]) * n[1]))};
      for (int a = 0; a < 3; ++a) {
        for (int s : {-1, 1}) {
          int q[3] = {ijk[0], ijk[1], ijk[2]};
          q[a] += s;
          int w = lap[c];
          if (q[a] < 0 || q[a] >= n[a]) {
            q[a] = (q[a] + n[a]) % n[a];
            if (a == axis) {
              w += s;
            }
          }
          const std::size_t nb = grid.index(q[0], q[1], q[2]);
          if (grid.fluid[nb] == 0) {
            continue;
          }
          if (lap[nb] == kUnvisited) {
            lap[nb] = w;
            queue.push_back(nb);
          } else if (lap[nb] != w) {
            return true;
          }
        }
      }
    }
  }
  return false;
}

VoxelGrid mirror_x(const VoxelGrid& grid) {
  VoxelGrid m = grid;
  for (int k = 0; k < grid.n[2]; ++k) {
    for (int j = 0; j < grid.n[1]; ++j) {
      for (int i = 0; i < grid.n[0]; ++i) {
        m.fluid[m.index(grid.n[0] - 1 - i, j, k)] = grid.fluid[grid.index(i, j, k)];
      }
    }
  }
  return m;
}

}  // namespace porous::pore
