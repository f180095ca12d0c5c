#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace porous::pore {

using Vec3 = std::array<double, 3>;

/// Equal spheres in a box that is periodic along all three axes. Lengths in metres.
struct SpherePack {
  Vec3 box{};
  double diameter = 0.0;
  std::vector<Vec3> centers;
  std::uint64_t seed = 0;

  double volume() const { return box[0] * box[1] * box[2]; }
  /// 1 - N (pi/6) D^3 / V; exact for non-overlapping spheres.
  double analytic_porosity() const;
  /// Throws InvalidArgument for a non-positive box or diameter, a centre
  /// outside [0, L) or a pair closer than D (1 - 1e-12).
  void validate() const;
};

/// Minimum-image displacement b - a.
Vec3 periodic_delta(const Vec3& a, const Vec3& b, const Vec3& box);

/// Number of pairs closer than D (1 - 1e-12) under the periodic metric.
std::size_t count_overlaps(const SpherePack& pack);

/// Hexagonal close packing (ABAB stacking) in the smallest periodic box
/// (2D, sqrt(3) D, 2 sqrt(2/3) D) holding 8 spheres.
SpherePack hexagonal_pack(double diameter);

struct RandomPackOptions {
  /// Porosity the sphere count is chosen for.
  double target_porosity = 0.40;
  /// Relaxation sweeps before one interior sphere is removed.
  int sweeps_per_attempt = 4000;
  /// Random insertion attempts per face sphere.
  int face_attempts = 100000;
};

/// Random pack: spheres are first inserted at random on the three periodic
/// faces x = 0, y = 0 and z = 0 (centres on the face), then the interior is
/// filled with spheres placed at random and separated by collective overlap
/// removal. Face spheres move only within their face. Deterministic per seed.
/// Throws InvalidArgument if an edge is shorter than 4D.
SpherePack random_pack(const Vec3& box, double diameter, std::uint64_t seed, const RandomPackOptions& options = {});

}  // namespace porous::pore
