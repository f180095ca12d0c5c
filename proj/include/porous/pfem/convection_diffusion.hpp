#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace porous::pfem {

/// u c' - Gamma c'' = f on (0, 1) with Dirichlet values at both ends, on a
/// uniform mesh of `elements` elements.
struct ConvDiff1DProblem {
  double velocity = 1.0;
  double diffusivity = 1.0;
  std::function<double(double)> source = [](double) { return 0.0; };
  double left_value = 0.0;
  double right_value = 0.0;
  int elements = 10;

  double element_size() const { return 1.0 / elements; }
  /// Pe = u h / (2 Gamma).
  double mesh_peclet() const;
  void validate() const;
};

/// Nodal system left after eliminating all internal modes on a uniform mesh.
///
/// Interior rows read scale * (-(1 + alpha) c_{j-1} + 2 c_j - (1 - alpha) c_{j+1})
/// = rhs * f for a constant source f, with scale = (Gamma + bar_gamma) / h^2.
struct CondensedTridiagonal {
  int degree = 1;
  double peclet = 0.0;
  double bar_gamma = 0.0;
  double alpha = 0.0;
  double scale = 0.0;
  /// Normalized stencil (-1 - alpha, 2, -1 + alpha).
  std::array<double, 3> stencil{};
  /// Condensed load of an interior node for f = 1, divided by h.
  double rhs = 1.0;
};

/// Element stiffness of degree p for u c' - Gamma c'' in the hierarchic basis.
/// Row/column order: the two nodal modes first, then internal modes 2..p.
Eigen::MatrixXd element_matrix(int degree, double velocity, double diffusivity, double h);

/// Element load vector for a constant unit source.
Eigen::VectorXd element_unit_load(int degree, double h);

/// Condenses a uniform-mesh element into its interior nodal stencil.
/// Throws NumericalError if the internal block is singular.
CondensedTridiagonal condense(int degree, double velocity, double diffusivity, double h);

/// Condensed stencil for the given mesh Peclet number (h = 1, u = 2 Pe Gamma).
CondensedTridiagonal condense_at_peclet(int degree, double peclet, double diffusivity = 1.0);

/// Numerical diffusivity that makes linear elements nodally exact:
/// (coth(Pe) - 1/Pe) Gamma Pe, continuously extended by 0 at Pe = 0.
double bar_gamma_exact(double peclet, double diffusivity);

/// Closed-form numerical diffusivity of the condensed p-FEM stencil, p in 2..5.
double bar_gamma_p(int degree, double peclet, double diffusivity);

/// Numerical diffusivity of degree p >= 1 obtained by static condensation.
double bar_gamma_p_numeric(int degree, double peclet, double diffusivity);

/// bar_gamma_exact - bar_gamma_p_numeric.
double truncation_error(int degree, double peclet, double diffusivity);

/// alpha_p = Pe / (1 + bar_gamma_p / Gamma). Nodal solutions are free of
/// oscillations iff alpha_p < 1.
double alpha_p(int degree, double peclet);

/// Largest Pe with alpha_p(Pe) <= 1 for odd p (p = 1 gives 1). Even degrees
/// have no finite threshold and are rejected.
double max_stable_pe(int degree);

/// Smallest odd degree whose threshold reaches Pe; 1 for Pe <= 1.
int min_degree_for_pe(double peclet);

/// Galerkin solution in the hierarchic basis of one fixed degree.
class DiscreteSolution {
 public:
  DiscreteSolution(int degree, int elements, std::vector<double> nodal, std::vector<double> internal);

  int degree() const { return degree_; }
  int elements() const { return elements_; }
  std::span<const double> nodal() const { return nodal_; }
  /// Internal coefficients of element e, modes 2..p.
  std::span<const double> internal(int element) const;
  double node(int j) const { return static_cast<double>(j) / elements_; }
  double evaluate(double x) const;

 private:
  int degree_;
  int elements_;
  std::vector<double> nodal_;
  std::vector<double> internal_;
};

DiscreteSolution solve_bvp(const ConvDiff1DProblem& problem, int degree);

/// (e^{a x / Gamma} - 1) / (e^{a / Gamma} - 1), evaluated without overflow;
/// returns x for a = 0.
double analytic_solution(double velocity, double diffusivity, double x);

/// Exact solution of u c' - Gamma c'' = 1 with c(0) = c(1) = 0.
double analytic_solution_unit_source(double velocity, double diffusivity, double x);

/// Sum over consecutive nodal increments of sqrt(max(0, -dc_j * dc_{j+1})).
/// Zero iff the sequence is monotone.
double oscillation_measure(std::span<const double> nodal_values);

}  // namespace porous::pfem
