#pragma once

#include <span>

namespace porous::pfem {

/// Hierarchic shape functions on the reference element [-1, 1].
///
/// Modes 0 and 1 are the nodal functions (1 - xi)/2 and (1 + xi)/2. Mode k >= 2
/// is the integrated Legendre polynomial
///   phi_k(xi) = (P_k(xi) - P_{k-2}(xi)) / sqrt(2 (2k - 1)),
/// whose derivative is sqrt((2k - 1)/2) P_{k-1}(xi). Internal modes vanish at
/// both endpoints and their derivatives are L2-orthonormal.
class HierarchicBasis {
 public:
  explicit HierarchicBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  int internal_modes() const { return degree_ - 1; }

  double value(int mode, double xi) const;
  double derivative(int mode, double xi) const;

  /// Values and derivatives of all modes at xi; both spans must hold size() entries.
  void evaluate(double xi, std::span<double> values, std::span<double> derivatives) const;

 private:
  int degree_;
};

}  // namespace porous::pfem
