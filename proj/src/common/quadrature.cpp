#include "porous/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "porous/error.hpp"

namespace porous {

void legendre(int n, double x, double& value, double& derivative) {
  double p_prev = 1.0;
  double p = x;
  if (n == 0) {
    value = 1.0;
    derivative = 0.0;
    return;
  }
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
    p_prev = p;
    p = next;
  }
  value = p;
  // P_n' from P_n and P_{n-1}; the endpoint form avoids the 1/(x^2 - 1) pole.
  if (std::abs(std::abs(x) - 1.0) < 1e-15) {
    const double sign = (x > 0.0 || n % 2 == 1) ? 1.0 : -1.0;
    derivative = sign * 0.5 * n * (n + 1.0);
  } else {
    derivative = n * (x * p - p_prev) / (x * x - 1.0);
  }
}

GaussRule gauss_legendre(int n) {
  if (n < 1) {
    throw InvalidArgument("gauss_legendre: need at least one point");
  }
  GaussRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double value = 0.0;
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      legendre(n, x, value, derivative);
      const double dx = value / derivative;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    legendre(n, x, value, derivative);
    const double w = 2.0 / ((1.0 - x * x) * derivative * derivative);
    rule.points[i] = -x;
    rule.points[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    rule.points[n / 2] = 0.0;
  }
  return rule;
}

GaussRule gauss_legendre_unit(int n) {
  GaussRule rule = gauss_legendre(n);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    rule.points[i] = 0.5 * (rule.points[i] + 1.0);
    rule.weights[i] *= 0.5;
  }
  return rule;
}

}  // namespace porous
