#include "porous/pfem/convection_diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "porous/error.hpp"
#include "porous/pfem/basis.hpp"
#include "porous/quadrature.hpp"

namespace porous::pfem {

double ConvDiff1DProblem::mesh_peclet() const {
  return velocity * element_size() / (2.0 * diffusivity);
}

void ConvDiff1DProblem::validate() const {
  if (!(diffusivity > 0.0)) {
    throw InvalidArgument("ConvDiff1DProblem: diffusivity must be positive");
  }
  if (elements < 1) {
    throw InvalidArgument("ConvDiff1DProblem: need at least one element");
  }
  if (!source) {
    throw InvalidArgument("ConvDiff1DProblem: source function is empty");
  }
}

Eigen::MatrixXd element_matrix(int degree, double velocity, double diffusivity, double h) {
  const HierarchicBasis basis(degree);
  const int n = basis.size();
  const GaussRule rule = gauss_legendre(degree + 1);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> v(n);
  std::vector<double> d(n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    basis.evaluate(rule.points[q], v, d);
    const double w = rule.weights[q];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        // d/dx = (2/h) d/dxi and dx = (h/2) dxi.
        k(i, j) += w * (velocity * d[j] * v[i] + diffusivity * (2.0 / h) * d[j] * d[i]);
      }
    }
  }
  return k;
}

Eigen::VectorXd element_unit_load(int degree, double h) {
  const HierarchicBasis basis(degree);
  const int n = basis.size();
  const GaussRule rule = gauss_legendre(degree + 1);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  std::vector<double> v(n);
  std::vector<double> d(n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    basis.evaluate(rule.points[q], v, d);
    for (int i = 0; i < n; ++i) {
      f(i) += rule.weights[q] * 0.5 * h * v[i];
    }
  }
  return f;
}

CondensedTridiagonal condense(int degree, double velocity, double diffusivity, double h) {
  if (!(diffusivity > 0.0) || !(h > 0.0)) {
    throw InvalidArgument("condense: diffusivity and element size must be positive");
  }
  const Eigen::MatrixXd k = element_matrix(degree, velocity, diffusivity, h);
  const Eigen::VectorXd load = element_unit_load(degree, h);

  // Correction to the 2x2 nodal block from eliminating internal modes.
  Eigen::Matrix2d correction = Eigen::Matrix2d::Zero();
  Eigen::Vector2d condensed_load = load.head<2>();
  const int m = degree - 1;
  if (m > 0) {
    const Eigen::MatrixXd kii = k.bottomRightCorner(m, m);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(kii);
    if (!lu.isInvertible()) {
      throw NumericalError("condense: singular internal block at Pe = " +
                           std::to_string(velocity * h / (2.0 * diffusivity)));
    }
    const Eigen::MatrixXd kin = k.bottomLeftCorner(m, 2);
    const Eigen::MatrixXd kni = k.topRightCorner(2, m);
    correction = -kni * lu.solve(kin);
    condensed_load -= kni * lu.solve(load.tail(m));
  }

  CondensedTridiagonal out;
  out.degree = degree;
  out.peclet = velocity * h / (2.0 * diffusivity);
  out.bar_gamma = 0.5 * h * (correction(0, 0) - correction(1, 0));
  const double diffusive = (diffusivity + out.bar_gamma) / h;
  const double convective = 0.5 * velocity - 0.5 * (correction(0, 0) + correction(1, 0));
  out.alpha = convective / diffusive;
  out.scale = diffusive / h;
  out.stencil = {-1.0 - out.alpha, 2.0, -1.0 + out.alpha};
  out.rhs = (condensed_load(0) + condensed_load(1)) / h;
  return out;
}

CondensedTridiagonal condense_at_peclet(int degree, double peclet, double diffusivity) {
  return condense(degree, 2.0 * peclet * diffusivity, diffusivity, 1.0);
}

double bar_gamma_exact(double peclet, double diffusivity) {
  const double x = std::abs(peclet);
  double g = 0.0;
  if (x < 0.1) {
    // x coth(x) - 1 by its Bernoulli series.
    const double x2 = x * x;
    g = x2 * (1.0 / 3.0 + x2 * (-1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 * (-1.0 / 4725.0 + x2 * 2.0 / 93555.0))));
  } else {
    g = x / std::tanh(x) - 1.0;
  }
  return g * diffusivity;
}

double bar_gamma_p(int degree, double peclet, double diffusivity) {
  const double pe2 = peclet * peclet;
  switch (degree) {
    case 2:
      return pe2 * diffusivity / 3.0;
    case 3:
      return 5.0 * pe2 * diffusivity / (pe2 + 15.0);
    case 4:
      return diffusivity * (pe2 * pe2 + 35.0 * pe2) / (10.0 * pe2 + 105.0);
    case 5:
      return 14.0 * diffusivity * (4.0 * pe2 * pe2 + 90.0 * pe2) / (4.0 * pe2 * pe2 + 420.0 * pe2 + 3780.0);
    default:
      throw InvalidArgument("bar_gamma_p: closed form only for degrees 2..5, use bar_gamma_p_numeric for degree " +
                            std::to_string(degree));
  }
}

double bar_gamma_p_numeric(int degree, double peclet, double diffusivity) {
  if (degree < 1) {
    throw InvalidArgument("bar_gamma_p_numeric: degree must be >= 1");
  }
  if (!std::isfinite(peclet)) {
    throw InvalidArgument("bar_gamma_p_numeric: Peclet number must be finite");
  }
  if (degree == 1 || peclet == 0.0) {
    return 0.0;
  }
  return condense_at_peclet(degree, peclet, diffusivity).bar_gamma;
}

double truncation_error(int degree, double peclet, double diffusivity) {
  return bar_gamma_exact(peclet, diffusivity) - bar_gamma_p_numeric(degree, peclet, diffusivity);
}

double alpha_p(int degree, double peclet) {
  if (peclet < 0.0) {
    throw InvalidArgument("alpha_p: Peclet number must be non-negative");
  }
  return peclet / (1.0 + bar_gamma_p_numeric(degree, peclet, 1.0));
}

double max_stable_pe(int degree) {
  if (degree < 1) {
    throw InvalidArgument("max_stable_pe: degree must be >= 1");
  }
  if (degree % 2 == 0) {
    throw InvalidArgument("max_stable_pe: alpha_p < 1 for every Pe when p is even (p = " + std::to_string(degree) +
                          "); there is no finite threshold");
  }
  if (degree == 1) {
    return 1.0;
  }
  const auto excess = [degree](double pe) { return alpha_p(degree, pe) - 1.0; };
  double lo = 1.0;
  double hi = 50.0;
  while (excess(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) {
      throw NumericalError("max_stable_pe: no threshold found below Pe = 1e6");
    }
  }
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = excess(mid);
    if (f_mid < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Newton polish with a secant slope taken from the final bracket.
  double pe = 0.5 * (lo + hi);
  for (int iter = 0; iter < 3; ++iter) {
    const double step = 1e-6 * pe;
    const double slope = (excess(pe + step) - excess(pe - step)) / (2.0 * step);
    if (!(slope > 0.0)) {
      break;
    }
    const double next = pe - excess(pe) / slope;
    if (next < lo - (hi - lo) || next > hi + (hi - lo)) {
      break;
    }
    pe = next;
  }
  return pe;
}

int min_degree_for_pe(double peclet) {
  if (peclet <= 1.0) {
    return 1;
  }
  for (int p = 3;; p += 2) {
    if (max_stable_pe(p) >= peclet) {
      return p;
    }
  }
}

DiscreteSolution::DiscreteSolution(int degree, int elements, std::vector<double> nodal, std::vector<double> internal)
    : degree_(degree), elements_(elements), nodal_(std::move(nodal)), internal_(std::move(internal)) {
  if (nodal_.size() != static_cast<std::size_t>(elements_ + 1) ||
      internal_.size() != static_cast<std::size_t>(elements_ * (degree_ - 1))) {
    throw InvalidArgument("DiscreteSolution: coefficient vector sizes do not match mesh");
  }
}

std::span<const double> DiscreteSolution::internal(int element) const {
  const std::size_t m = static_cast<std::size_t>(degree_ - 1);
  return std::span<const double>(internal_).subspan(static_cast<std::size_t>(element) * m, m);
}

double DiscreteSolution::evaluate(double x) const {
  const double clamped = std::clamp(x, 0.0, 1.0);
  const int e = std::min(static_cast<int>(clamped * elements_), elements_ - 1);
  const double h = 1.0 / elements_;
  const double xi = 2.0 * (clamped - e * h) / h - 1.0;
  const HierarchicBasis basis(degree_);
  std::vector<double> v(basis.size());
  std::vector<double> d(basis.size());
  basis.evaluate(xi, v, d);
  double value = nodal_[e] * v[0] + nodal_[e + 1] * v[1];
  const auto modes = internal(e);
  for (int k = 2; k <= degree_; ++k) {
    value += modes[k - 2] * v[k];
  }
  return value;
}

DiscreteSolution solve_bvp(const ConvDiff1DProblem& problem, int degree) {
  problem.validate();
  const int n = problem.elements;
  const int m = degree - 1;
  const double h = problem.element_size();
  const int nodes = n + 1;
  const int dofs = nodes + n * m;
  const auto dof_of = [&](int element, int mode) {
    return mode < 2 ? element + mode : nodes + element * m + (mode - 2);
  };

  const Eigen::MatrixXd ke = element_matrix(degree, problem.velocity, problem.diffusivity, h);
  const HierarchicBasis basis(degree);
  const GaussRule rule = gauss_legendre(degree + 1);
  std::vector<double> v(basis.size());
  std::vector<double> d(basis.size());

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * (degree + 1) * (degree + 1));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs);
  for (int e = 0; e < n; ++e) {
    for (int i = 0; i <= degree; ++i) {
      const int row = dof_of(e, i);
      if (row == 0 || row == n) {
        continue;
      }
      for (int j = 0; j <= degree; ++j) {
        triplets.emplace_back(row, dof_of(e, j), ke(i, j));
      }
    }
    for (std::size_t q = 0; q < rule.size(); ++q) {
      basis.evaluate(rule.points[q], v, d);
      const double x = (e + 0.5 * (rule.points[q] + 1.0)) * h;
      const double fx = problem.source(x);
      for (int i = 0; i <= degree; ++i) {
        rhs(dof_of(e, i)) += rule.weights[q] * 0.5 * h * fx * v[i];
      }
    }
  }
  triplets.emplace_back(0, 0, 1.0);
  triplets.emplace_back(n, n, 1.0);
  rhs(0) = problem.left_value;
  rhs(n) = problem.right_value;

  Eigen::SparseMatrix<double> a(dofs, dofs);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("solve_bvp: singular system");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  if (!x.allFinite()) {
    throw NumericalError("solve_bvp: non-finite solution");
  }
  std::vector<double> nodal(x.data(), x.data() + nodes);
  std::vector<double> internal(x.data() + nodes, x.data() + dofs);
  return DiscreteSolution(degree, n, std::move(nodal), std::move(internal));
}

double analytic_solution(double velocity, double diffusivity, double x) {
  if (!(diffusivity > 0.0)) {
    throw InvalidArgument("analytic_solution: diffusivity must be positive");
  }
  const double r = velocity / diffusivity;
  if (r == 0.0) {
    return x;
  }
  if (r > 0.0) {
    // e^{r (x - 1)} (1 - e^{-r x}) / (1 - e^{-r})
    return std::exp(r * (x - 1.0)) * std::expm1(-r * x) / std::expm1(-r);
  }
  return std::expm1(r * x) / std::expm1(r);
}

double analytic_solution_unit_source(double velocity, double diffusivity, double x) {
  if (velocity == 0.0) {
    return x * (1.0 - x) / (2.0 * diffusivity);
  }
  return (x - analytic_solution(velocity, diffusivity, x)) / velocity;
}

double oscillation_measure(std::span<const double> nodal_values) {
  double total = 0.0;
  for (std::size_t j = 0; j + 2 < nodal_values.size(); ++j) {
    const double left = nodal_values[j + 1] - nodal_values[j];
    const double right = nodal_values[j + 2] - nodal_values[j + 1];
    total += std::sqrt(std::max(0.0, -left * right));
  }
  return total;
}

}  // namespace porous::pfem
