#include "porous/pore/pdf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "porous/error.hpp"

namespace porous::pore {

void BinSpec::validate() const {
  if (!(width > 0.0) || bins < 1 || !std::isfinite(lower)) {
    throw InvalidArgument("histogram: bins must have positive width and count");
  }
}

double VelocityHistogram::total_mass() const {
  double s = 0.0;
  for (double p : pdf) {
    s += p;
  }
  return s * spec.width + below + above;
}

double VelocityHistogram::mean() const {
  double m = 0.0;
  double w = 0.0;
  for (int b = 0; b < spec.bins; ++b) {
    m += pdf[b] * spec.center(b);
    w += pdf[b];
  }
  return w > 0.0 ? m / w : 0.0;
}

double VelocityHistogram::variance() const {
  const double mu = mean();
  double v = 0.0;
  double w = 0.0;
  for (int b = 0; b < spec.bins; ++b) {
    const double d = spec.center(b) - mu;
    v += pdf[b] * d * d;
    w += pdf[b];
  }
  return w > 0.0 ? v / w : 0.0;
}

double VelocityHistogram::skewness() const {
  const double mu = mean();
  const double var = variance();
  if (var <= 0.0) {
    return 0.0;
  }
  double s = 0.0;
  double w = 0.0;
  for (int b = 0; b < spec.bins; ++b) {
    const double d = spec.center(b) - mu;
    s += pdf[b] * d * d * d;
    w += pdf[b];
  }
  return s / w / std::pow(var, 1.5);
}

double VelocityHistogram::mode() const {
  const auto it = std::max_element(pdf.begin(), pdf.end());
  return spec.center(static_cast<int>(it - pdf.begin()));
}

double VelocityHistogram::negative_mass() const {
  double m = below;
  for (int b = 0; b < spec.bins; ++b) {
    if (spec.center(b) < 0.0) {
      m += pdf[b] * spec.width;
    }
  }
  return m;
}

double VelocityHistogram::support_max() const {
  for (int b = spec.bins - 1; b >= 0; --b) {
    if (pdf[b] > 0.0) {
      return spec.lower + (b + 1) * spec.width;
    }
  }
  return spec.lower;
}

namespace {

bool in_inner_region(const VoxelGrid& grid, std::array<int, 3> ijk, const Vec3& box, double margin) {
  for (int a = 0; a < 3; ++a) {
    const double x = (ijk[a] + 0.5) * grid.spacing[a];
    if (x < margin || x > box[a] - margin) {
      return false;
    }
  }
  return true;
}

}  // namespace

VelocityHistogram velocity_pdf(const StokesField& field, const VoxelGrid& grid, double diameter, Region region,
                               const BinSpec& spec, bool normalize) {
  spec.validate();
  if (field.n != grid.n) {
    throw InvalidArgument("velocity_pdf: field and grid dimensions differ");
  }
  if (!(diameter > 0.0)) {
    throw InvalidArgument("velocity_pdf: diameter must be positive");
  }
  VelocityHistogram h;
  h.spec = spec;
  h.region = region;
  h.normalized = normalize;
  h.pdf.assign(spec.bins, 0.0);
  h.intrinsic_velocity = intrinsic_velocity(field, grid);
  if (normalize && h.intrinsic_velocity == 0.0) {
    throw InvalidArgument("velocity_pdf: cannot normalize by a zero intrinsic velocity");
  }
  const double scale = normalize ? 1.0 / h.intrinsic_velocity : 1.0;
  const std::vector<double> uc = cell_velocity_x(field);
  const Vec3 box = grid.box();
  const double margin = 1.5 * diameter;
  std::vector<double> counts(spec.bins, 0.0);
  double below = 0.0;
  double above = 0.0;
  for (int k = 0; k < grid.n[2]; ++k) {
    for (int j = 0; j < grid.n[1]; ++j) {
      for (int i = 0; i < grid.n[0]; ++i) {
        const std::size_t c = grid.index(i, j, k);
        if (grid.fluid[c] == 0) {
          continue;
        }
        if (region == Region::inner && !in_inner_region(grid, {i, j, k}, box, margin)) {
          continue;
        }
        ++h.samples;
        const double v = uc[c] * scale;
        const double pos = std::floor((v - spec.lower) / spec.width);
        if (pos < 0.0) {
          below += 1.0;
        } else if (pos >= spec.bins) {
          above += 1.0;
        } else {
          counts[static_cast<std::size_t>(pos)] += 1.0;
        }
      }
    }
  }
  if (h.samples == 0) {
    throw InvalidArgument("velocity_pdf: the sampled region contains no fluid cell");
  }
  const double n = static_cast<double>(h.samples);
  for (int b = 0; b < spec.bins; ++b) {
    h.pdf[b] = counts[b] / (n * spec.width);
  }
  h.below = below / n;
  h.above = above / n;
  return h;
}

RegionFlow region_flow(const StokesField& field, const VoxelGrid& grid, double diameter, Region region) {
  if (field.n != grid.n) {
    throw InvalidArgument("region_flow: field and grid dimensions differ");
  }
  const std::vector<double> uc = cell_velocity_x(field);
  const Vec3 box = grid.box();
  const double margin = 1.5 * diameter;
  RegionFlow out;
  std::size_t fluid = 0;
  double sum = 0.0;
  for (int k = 0; k < grid.n[2]; ++k) {
    for (int j = 0; j < grid.n[1]; ++j) {
      for (int i = 0; i < grid.n[0]; ++i) {
        if (region == Region::inner && !in_inner_region(grid, {i, j, k}, box, margin)) {
          continue;
        }
        const std::size_t c = grid.index(i, j, k);
        ++out.cells;
        if (grid.fluid[c] != 0) {
          ++fluid;
          sum += uc[c];
        }
      }
    }
  }
  if (fluid == 0) {
    throw InvalidArgument("region_flow: the region contains no fluid cell");
  }
  out.porosity = static_cast<double>(fluid) / static_cast<double>(out.cells);
  out.superficial_velocity = sum / static_cast<double>(out.cells);
  out.intrinsic_velocity = sum / static_cast<double>(fluid);
  out.permeability = field.viscosity * out.superficial_velocity / field.gradient;
  return out;
}

VelocityHistogram ensemble_average(const std::vector<VelocityHistogram>& histograms) {
  if (histograms.empty()) {
    throw InvalidArgument("ensemble_average: no histograms");
  }
  const VelocityHistogram& first = histograms.front();
  VelocityHistogram out = first;
  std::fill(out.pdf.begin(), out.pdf.end(), 0.0);
  out.below = 0.0;
  out.above = 0.0;
  out.samples = 0;
  out.intrinsic_velocity = 0.0;
  for (const auto& h : histograms) {
    if (!(h.spec == first.spec) || h.region != first.region || h.normalized != first.normalized ||
        h.pdf.size() != first.pdf.size()) {
      throw InvalidArgument("ensemble_average: histograms use different bins, regions or normalization");
    }
    for (std::size_t b = 0; b < h.pdf.size(); ++b) {
      out.pdf[b] += h.pdf[b];
    }
    out.below += h.below;
    out.above += h.above;
    out.samples += h.samples;
    out.intrinsic_velocity += h.intrinsic_velocity;
  }
  const double m = static_cast<double>(histograms.size());
  for (double& p : out.pdf) {
    p /= m;
  }
  out.below /= m;
  out.above /= m;
  out.intrinsic_velocity /= m;
  return out;
}

double l1_distance(const VelocityHistogram& a, const VelocityHistogram& b) {
  if (!(a.spec == b.spec)) {
    throw InvalidArgument("l1_distance: histograms use different bins");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.pdf.size(); ++i) {
    d += std::abs(a.pdf[i] - b.pdf[i]);
  }
  return d * a.spec.width + std::abs(a.below - b.below) + std::abs(a.above - b.above);
}

}  // namespace porous::pore
