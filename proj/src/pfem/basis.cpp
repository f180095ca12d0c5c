#include "porous/pfem/basis.hpp"

#include <cmath>
#include <vector>

#include "porous/error.hpp"

namespace porous::pfem {

HierarchicBasis::HierarchicBasis(int degree) : degree_(degree) {
  if (degree < 1) {
    throw InvalidArgument("HierarchicBasis: degree must be >= 1");
  }
}

void HierarchicBasis::evaluate(double xi, std::span<double> values, std::span<double> derivatives) const {
  if (values.size() < static_cast<std::size_t>(size()) || derivatives.size() < static_cast<std::size_t>(size())) {
    throw InvalidArgument("HierarchicBasis::evaluate: output spans too small");
  }
  values[0] = 0.5 * (1.0 - xi);
  values[1] = 0.5 * (1.0 + xi);
  derivatives[0] = -0.5;
  derivatives[1] = 0.5;
  if (degree_ < 2) {
    return;
  }
  // Legendre values P_0..P_p by recurrence.
  std::vector<double> legendre(degree_ + 1);
  legendre[0] = 1.0;
  legendre[1] = xi;
  for (int k = 1; k < degree_; ++k) {
    legendre[k + 1] = ((2.0 * k + 1.0) * xi * legendre[k] - k * legendre[k - 1]) / (k + 1.0);
  }
  for (int k = 2; k <= degree_; ++k) {
    values[k] = (legendre[k] - legendre[k - 2]) / std::sqrt(2.0 * (2.0 * k - 1.0));
    derivatives[k] = std::sqrt((2.0 * k - 1.0) / 2.0) * legendre[k - 1];
  }
}

double HierarchicBasis::value(int mode, double xi) const {
  if (mode < 0 || mode > degree_) {
    throw InvalidArgument("HierarchicBasis::value: mode out of range");
  }
  std::vector<double> v(size());
  std::vector<double> d(size());
  evaluate(xi, v, d);
  return v[mode];
}

double HierarchicBasis::derivative(int mode, double xi) const {
  if (mode < 0 || mode > degree_) {
    throw InvalidArgument("HierarchicBasis::derivative: mode out of range");
  }
  std::vector<double> v(size());
  std::vector<double> d(size());
  evaluate(xi, v, d);
  return d[mode];
}

}  // namespace porous::pfem
