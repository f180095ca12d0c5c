#pragma once

#include <cstddef>
#include <vector>

#include "porous/pore/stokes.hpp"

namespace porous::pore {

/// Uniform bins [lower + b width, lower + (b + 1) width), b = 0..bins-1.
struct BinSpec {
  double lower = -2.6e-7;
  double width = 8e-10;
  int bins = 1325;

  double upper() const { return lower + width * bins; }
  double center(int b) const { return lower + (b + 0.5) * width; }
  /// Throws InvalidArgument for a non-positive width or bin count.
  void validate() const;
  bool operator==(const BinSpec&) const = default;

  /// Raw velocities in m/s.
  static BinSpec raw() { return {}; }
  /// Velocities divided by the intrinsic velocity.
  static BinSpec normalized() { return {-1.0, 0.01, 800}; }
};

enum class Region { inner, total };

struct VelocityHistogram {
  BinSpec spec;
  Region region = Region::total;
  bool normalized = false;
  /// Density per bin; sum(pdf) * width + below + above = 1.
  std::vector<double> pdf;
  /// Probability mass below lower() and at or above upper().
  double below = 0.0;
  double above = 0.0;
  std::size_t samples = 0;
  /// Intrinsic velocity used for normalization (or recorded for reference).
  double intrinsic_velocity = 0.0;

  double total_mass() const;
  double mean() const;
  double variance() const;
  double skewness() const;
  /// Centre of the most populated bin.
  double mode() const;
  /// Mass at negative values, including the out-of-range mass below.
  double negative_mass() const;
  /// Right edge of the last non-empty bin.
  double support_max() const;
};

/// Histogram of the cell-centred streamwise velocity over fluid cells. With
/// Region::inner only cells whose centres are at least 1.5 D from every face
/// of the box are sampled. With normalize = true each sample is divided by
/// the intrinsic velocity of the whole field first. Throws InvalidArgument
/// when the region holds no fluid cell.
VelocityHistogram velocity_pdf(const StokesField& field, const VoxelGrid& grid, double diameter, Region region,
                               const BinSpec& spec, bool normalize = false);

/// Porosity and mean streamwise flow over the cells of a region (same rule as velocity_pdf).
struct RegionFlow {
  std::size_t cells = 0;
  double porosity = 0.0;
  double superficial_velocity = 0.0;
  double intrinsic_velocity = 0.0;
  /// mu <u> / G restricted to the region.
  double permeability = 0.0;
};

RegionFlow region_flow(const StokesField& field, const VoxelGrid& grid, double diameter, Region region);

/// Arithmetic mean of the densities. Throws InvalidArgument for an empty list
/// or differing bins, regions or normalization.
VelocityHistogram ensemble_average(const std::vector<VelocityHistogram>& histograms);

/// Integral of |pdf_a - pdf_b| plus the difference of the out-of-range masses.
double l1_distance(const VelocityHistogram& a, const VelocityHistogram& b);

}  // namespace porous::pore
