#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "porous/error.hpp"

namespace porous::ident {

/// Smooth scalar function of a parameter vector with first and second
/// derivative information.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t size() const = 0;
  virtual double value(const Eigen::VectorXd& q) = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& q) = 0;
  virtual Eigen::VectorXd hessian_vector(const Eigen::VectorXd& q, const Eigen::VectorXd& dq) = 0;
};

/// Box l <= q <= u. Missing upper bounds are +inf.
struct ConstraintSet {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// Lower bound 1 on every entry, no upper bounds.
  static ConstraintSet standard(std::size_t n);
  std::size_t size() const { return static_cast<std::size_t>(lower.size()); }
  bool is_feasible(const Eigen::VectorXd& q) const;
  Eigen::VectorXd project(const Eigen::VectorXd& q) const;
  /// q - P(q - g); zero exactly at a KKT point.
  Eigen::VectorXd projected_gradient(const Eigen::VectorXd& q, const Eigen::VectorXd& g) const;
  /// Throws InvalidArgument for mismatched sizes, NaN bounds or lower > upper.
  void validate() const;
};

struct NewtonCGOptions {
  double armijo = 1e-4;
  int max_halvings = 30;
  /// CG iteration cap; 0 means the number of free coordinates.
  int max_cg_iterations = 0;
};

struct NewtonStepResult {
  Eigen::VectorXd q;
  double value_before = 0.0;
  double value_after = 0.0;
  double step_length = 0.0;
  int cg_iterations = 0;
  bool negative_curvature = false;
  /// False when the line search found no decrease; q is then unchanged.
  bool accepted = false;
};

/// One globalized Newton-CG step on the coordinates with active[i] == false.
/// Active coordinates are left untouched. The new iterate is the projection
/// of q + t d onto the box, with t chosen by Armijo backtracking.
NewtonStepResult newton_cg_step(Objective& objective, const Eigen::VectorXd& q, const std::vector<bool>& active,
                                const ConstraintSet& constraints, const NewtonCGOptions& options = {});

struct PdasOptions {
  double tolerance = 1e-8;
  int max_outer_iterations = 50;
  int max_inner_iterations = 50;
  /// Weight c in the active-set prediction lambda + c (l - q) > 0.
  double complementarity = 1.0;
  NewtonCGOptions newton;
};

struct PdasIteration {
  double value = 0.0;
  double projected_gradient_norm = 0.0;
  std::vector<int> active_lower;
  std::vector<int> active_upper;
  int newton_steps = 0;
  int cg_iterations = 0;
  /// Objective after every accepted Newton step of this outer iteration.
  std::vector<double> inner_values;
};

struct PdasResult {
  Eigen::VectorXd q;
  double value = 0.0;
  double projected_gradient_norm = 0.0;
  std::vector<PdasIteration> history;
  int total_newton_steps = 0;
};

/// Raised when PDAS hits its outer iteration cap. residual_history() holds the
/// projected gradient norm of every outer iteration.
class PdasError : public NumericalError {
 public:
  PdasError(const std::string& what, std::vector<double> history, PdasResult last)
      : NumericalError(what, std::move(history)), last_(std::move(last)) {}
  const PdasResult& last() const noexcept { return last_; }

 private:
  PdasResult last_;
};

/// Primal-dual active set method with Newton-CG solves on the inactive set.
/// An infeasible q0 is projected first. Stops once the predicted active set
/// repeats and the projected gradient norm is below the tolerance.
PdasResult pdas_solve(Objective& objective, const Eigen::VectorXd& q0, const ConstraintSet& constraints,
                      const PdasOptions& options = {});

}  // namespace porous::ident
