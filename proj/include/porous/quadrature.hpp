#pragma once

#include <vector>

namespace porous {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree 2n - 1.
GaussRule gauss_legendre(int n);

/// Same rule mapped to [0, 1] (weights sum to 1).
GaussRule gauss_legendre_unit(int n);

/// Legendre polynomial P_n(x) and its derivative via the three-term recurrence.
void legendre(int n, double x, double& value, double& derivative);

}  // namespace porous
