#include "porous/pore/pack.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "porous/error.hpp"
#include "porous/random.hpp"

namespace porous::pore {

namespace {

constexpr double kOverlapTolerance = 1e-12;

double wrap(double x, double l) {
  double y = std::fmod(x, l);
  if (y < 0.0) {
    y += l;
  }
  return y >= l ? 0.0 : y;
}

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

/// Uniform cell list over the periodic box with cells at least D wide.
class CellList {
 public:
  CellList(const Vec3& box, double diameter) : box_(box) {
    for (int a = 0; a < 3; ++a) {
      n_[a] = std::max(1, static_cast<int>(std::floor(box[a] / diameter)));
    }
    cells_.resize(static_cast<std::size_t>(n_[0]) * n_[1] * n_[2]);
  }

  void build(const std::vector<Vec3>& x) {
    for (auto& c : cells_) {
      c.clear();
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      cells_[index(cell_of(x[i]))].push_back(static_cast<int>(i));
    }
  }

  /// Calls f(j) for every sphere in the 27 cells around p (each at most once).
  template <class F>
  void for_neighbors(const Vec3& p, F&& f) const {
    const std::array<int, 3> c = cell_of(p);
    std::array<int, 3> lo{};
    std::array<int, 3> hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = n_[a] >= 3 ? -1 : 0;
      hi[a] = n_[a] >= 3 ? 1 : n_[a] - 1;
    }
    for (int dz = lo[2]; dz <= hi[2]; ++dz) {
      for (int dy = lo[1]; dy <= hi[1]; ++dy) {
        for (int dx = lo[0]; dx <= hi[0]; ++dx) {
          std::array<int, 3> q{};
          if (n_[0] >= 3) {
            q = {(c[0] + dx + n_[0]) % n_[0], 0, 0};
          } else {
            q[0] = dx;
          }
          q[1] = n_[1] >= 3 ? (c[1] + dy + n_[1]) % n_[1] : dy;
          q[2] = n_[2] >= 3 ? (c[2] + dz + n_[2]) % n_[2] : dz;
          for (int j : cells_[index(q)]) {
            f(j);
          }
        }
      }
    }
  }

 private:
  std::array<int, 3> cell_of(const Vec3& p) const {
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) {
      c[a] = std::min(n_[a] - 1, static_cast<int>(p[a] / box_[a] * n_[a]));
    }
    return c;
  }
  std::size_t index(const std::array<int, 3>& c) const {
    return static_cast<std::size_t>(c[0]) + static_cast<std::size_t>(n_[0]) * (c[1] + static_cast<std::size_t>(n_[1]) * c[2]);
  }

  Vec3 box_;
  std::array<int, 3> n_{};
  std::vector<std::vector<int>> cells_;
};

}  // namespace

Vec3 periodic_delta(const Vec3& a, const Vec3& b, const Vec3& box) {
  Vec3 d{};
  for (int k = 0; k < 3; ++k) {
    d[k] = b[k] - a[k];
    d[k] -= box[k] * std::round(d[k] / box[k]);
  }
  return d;
}

double SpherePack::analytic_porosity() const {
  return 1.0 - static_cast<double>(centers.size()) * std::numbers::pi / 6.0 * diameter * diameter * diameter / volume();
}

void SpherePack::validate() const {
  if (!(diameter > 0.0)) {
    throw InvalidArgument("sphere pack: diameter must be positive");
  }
  for (int a = 0; a < 3; ++a) {
    if (!(box[a] > 0.0)) {
      throw InvalidArgument("sphere pack: box edges must be positive");
    }
  }
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      if (!(centers[i][a] >= 0.0 && centers[i][a] < box[a])) {
        throw InvalidArgument("sphere pack: centre " + std::to_string(i) + " lies outside the box");
      }
    }
  }
  const std::size_t overlaps = count_overlaps(*this);
  if (overlaps != 0) {
    throw InvalidArgument("sphere pack: " + std::to_string(overlaps) + " overlapping pairs");
  }
}

std::size_t count_overlaps(const SpherePack& pack) {
  const double dmin = pack.diameter * (1.0 - kOverlapTolerance);
  std::size_t count = 0;
  for (std::size_t i = 0; i < pack.centers.size(); ++i) {
    for (std::size_t j = i + 1; j < pack.centers.size(); ++j) {
      if (norm(periodic_delta(pack.centers[i], pack.centers[j], pack.box)) < dmin) {
        ++count;
      }
    }
  }
  return count;
}

SpherePack hexagonal_pack(double diameter) {
  if (!(diameter > 0.0)) {
    throw InvalidArgument("hexagonal_pack: diameter must be positive");
  }
  const double d = diameter;
  const double row = std::sqrt(3.0) / 2.0 * d;
  const double layer = std::sqrt(2.0 / 3.0) * d;
  SpherePack pack;
  pack.diameter = d;
  pack.box = {2.0 * d, 2.0 * row, 2.0 * layer};
  const std::array<std::array<double, 2>, 4> a_layer = {{{0.0, 0.0}, {d, 0.0}, {0.5 * d, row}, {1.5 * d, row}}};
  for (int l = 0; l < 2; ++l) {
    // B layer sits over the centroids of A-layer triangles.
    const double sx = l == 0 ? 0.0 : 0.5 * d;
    const double sy = l == 0 ? 0.0 : row / 3.0;
    for (const auto& p : a_layer) {
      pack.centers.push_back({wrap(p[0] + sx, pack.box[0]), wrap(p[1] + sy, pack.box[1]), l * layer});
    }
  }
  return pack;
}

SpherePack random_pack(const Vec3& box, double diameter, std::uint64_t seed, const RandomPackOptions& options) {
  if (!(diameter > 0.0)) {
    throw InvalidArgument("random_pack: diameter must be positive");
  }
  for (int a = 0; a < 3; ++a) {
    if (!(box[a] >= 4.0 * diameter * (1.0 - 1e-12))) {
      throw InvalidArgument("random_pack: box edge " + std::to_string(box[a]) + " is shorter than 4 diameters");
    }
  }
  if (!(options.target_porosity > 0.0 && options.target_porosity < 1.0)) {
    throw InvalidArgument("random_pack: target porosity must lie in (0, 1)");
  }
  std::mt19937_64 rng(seed);
  const auto uniform = [&](double l) { return l * unit_uniform(rng()); };
  const double d = diameter;

  SpherePack pack;
  pack.box = box;
  pack.diameter = d;
  pack.seed = seed;
  std::vector<Vec3>& x = pack.centers;
  // Axis a sphere i is pinned to (-1: free).
  std::vector<int> pinned;

  const auto fits = [&](const Vec3& p) {
    for (const Vec3& c : x) {
      if (norm(periodic_delta(p, c, box)) < d) {
        return false;
      }
    }
    return true;
  };

  for (int a = 0; a < 3; ++a) {
    int failures = 0;
    while (failures < options.face_attempts) {
      Vec3 p{uniform(box[0]), uniform(box[1]), uniform(box[2])};
      p[a] = 0.0;
      if (fits(p)) {
        x.push_back(p);
        pinned.push_back(a);
        failures = 0;
      } else {
        ++failures;
      }
    }
  }

  const double sphere_volume = std::numbers::pi / 6.0 * d * d * d;
  const auto target =
      static_cast<std::size_t>(std::llround((1.0 - options.target_porosity) * pack.volume() / sphere_volume));
  while (x.size() < target) {
    x.push_back({uniform(box[0]), uniform(box[1]), uniform(box[2])});
    pinned.push_back(-1);
  }

  // Collective overlap removal: each overlapping pair is pushed apart along the
  // line of centres, with a small overshoot so that the final distance is >= D.
  CellList cells(box, d);
  std::vector<Vec3> shift(x.size());
  int sweeps = 0;
  for (;;) {
    cells.build(x);
    std::fill(shift.begin(), shift.end(), Vec3{0.0, 0.0, 0.0});
    bool overlap = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      cells.for_neighbors(x[i], [&](int j) {
        if (static_cast<std::size_t>(j) <= i) {
          return;
        }
        Vec3 delta = periodic_delta(x[i], x[j], box);
        double dist = norm(delta);
        if (dist >= d) {
          return;
        }
        overlap = true;
        if (dist == 0.0) {
          delta = {uniform(2.0) - 1.0, uniform(2.0) - 1.0, uniform(2.0) - 1.0};
          dist = norm(delta);
        }
        const double push = 0.5 * (d - dist) * 1.05 + 1e-10 * d;
        for (int k = 0; k < 3; ++k) {
          const double s = push * delta[k] / dist;
          shift[i][k] -= s;
          shift[j][k] += s;
        }
      });
    }
    if (!overlap) {
      break;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        if (pinned[i] != k) {
          x[i][k] = wrap(x[i][k] + shift[i][k], box[k]);
        }
      }
    }
    if (++sweeps >= options.sweeps_per_attempt) {
      // Jammed: drop one free sphere and continue from the current positions.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (pinned[i] < 0) {
          free.push_back(i);
        }
      }
      if (free.empty()) {
        throw NumericalError("random_pack: overlap removal failed with only face spheres left");
      }
      const std::size_t drop = free[static_cast<std::size_t>(uniform(static_cast<double>(free.size())))];
      x.erase(x.begin() + static_cast<std::ptrdiff_t>(drop));
      pinned.erase(pinned.begin() + static_cast<std::ptrdiff_t>(drop));
      shift.resize(x.size());
      sweeps = 0;
    }
  }
  pack.validate();
  return pack;
}

}  // namespace porous::pore
