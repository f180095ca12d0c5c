#include "porous/ident/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace porous::ident {

namespace {

std::vector<int> free_indices(const std::vector<bool>& active) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (!active[i]) {
      idx.push_back(static_cast<int>(i));
    }
  }
  return idx;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  }
  return out;
}

Eigen::VectorXd scatter(const Eigen::VectorXd& v, const std::vector<int>& idx, Eigen::Index n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out(idx[i]) = v(static_cast<Eigen::Index>(i));
  }
  return out;
}

}  // namespace

ConstraintSet ConstraintSet::standard(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return {Eigen::VectorXd::Ones(m), Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity())};
}

void ConstraintSet::validate() const {
  if (lower.size() != upper.size()) {
    throw InvalidArgument("constraints: lower and upper bounds differ in length");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) > upper(i)) {
      throw InvalidArgument("constraints: empty or invalid interval at entry " + std::to_string(i));
    }
  }
}

bool ConstraintSet::is_feasible(const Eigen::VectorXd& q) const {
  if (q.size() != lower.size()) {
    return false;
  }
  return ((q.array() >= lower.array()) && (q.array() <= upper.array())).all();
}

Eigen::VectorXd ConstraintSet::project(const Eigen::VectorXd& q) const {
  if (q.size() != lower.size()) {
    throw InvalidArgument("constraints: parameter vector has length " + std::to_string(q.size()) + ", expected " +
                          std::to_string(lower.size()));
  }
  return q.cwiseMax(lower).cwiseMin(upper);
}

Eigen::VectorXd ConstraintSet::projected_gradient(const Eigen::VectorXd& q, const Eigen::VectorXd& g) const {
  return q - project(q - g);
}

NewtonStepResult newton_cg_step(Objective& objective, const Eigen::VectorXd& q, const std::vector<bool>& active,
                                const ConstraintSet& constraints, const NewtonCGOptions& options) {
  const Eigen::Index n = q.size();
  if (active.size() != static_cast<std::size_t>(n)) {
    throw InvalidArgument("newton_cg_step: active mask does not match the parameter length");
  }
  NewtonStepResult out;
  out.q = q;
  out.value_before = objective.value(q);
  out.value_after = out.value_before;

  const std::vector<int> idx = free_indices(active);
  if (idx.empty()) {
    return out;
  }
  const Eigen::VectorXd g = objective.gradient(q);
  const Eigen::VectorXd gf = gather(g, idx);
  const double gnorm = gf.norm();
  if (gnorm == 0.0) {
    return out;
  }

  // Truncated CG on H_FF d = -g_F.
  const double tol = std::min(0.5, std::sqrt(gnorm)) * gnorm;
  const int cap = options.max_cg_iterations > 0 ? options.max_cg_iterations : static_cast<int>(idx.size());
  Eigen::VectorXd d = Eigen::VectorXd::Zero(gf.size());
  Eigen::VectorXd r = -gf;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < cap; ++it) {
    const Eigen::VectorXd hp = gather(objective.hessian_vector(q, scatter(p, idx, n)), idx);
    ++out.cg_iterations;
    const double curvature = p.dot(hp);
    if (!(curvature > 0.0)) {
      out.negative_curvature = true;
      if (it == 0) {
        d = -gf;
      }
      break;
    }
    const double step = rr / curvature;
    d += step * p;
    r -= step * hp;
    const double rr_new = r.squaredNorm();
    if (std::sqrt(rr_new) <= tol) {
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }

  // Projected Armijo backtracking.
  const Eigen::VectorXd dir = scatter(d, idx, n);
  double t = 1.0;
  for (int k = 0; k <= options.max_halvings; ++k, t *= 0.5) {
    const Eigen::VectorXd trial = constraints.project(q + t * dir);
    const double decrease = g.dot(trial - q);
    if (trial == q) {
      break;
    }
    const double value = objective.value(trial);
    if (value <= out.value_before + options.armijo * decrease && decrease < 0.0) {
      out.q = trial;
      out.value_after = value;
      out.step_length = t;
      out.accepted = true;
      return out;
    }
  }
  return out;
}

PdasResult pdas_solve(Objective& objective, const Eigen::VectorXd& q0, const ConstraintSet& constraints,
                      const PdasOptions& options) {
  constraints.validate();
  if (q0.size() != static_cast<Eigen::Index>(objective.size()) || constraints.size() != objective.size()) {
    throw InvalidArgument("pdas_solve: parameter, constraint and objective sizes differ");
  }
  const Eigen::Index n = q0.size();
  const double c = options.complementarity;

  PdasResult result;
  result.q = constraints.project(q0);
  std::vector<double> pg_history;
  std::vector<int> prev_lower;
  std::vector<int> prev_upper;
  bool have_prev = false;

  for (int outer = 0; outer < options.max_outer_iterations; ++outer) {
    Eigen::VectorXd g = objective.gradient(result.q);
    PdasIteration iter;
    std::vector<bool> active(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (g(i) + c * (constraints.lower(i) - result.q(i)) > 0.0) {
        iter.active_lower.push_back(static_cast<int>(i));
        active[i] = true;
        result.q(i) = constraints.lower(i);
      } else if (std::isfinite(constraints.upper(i)) && -g(i) + c * (result.q(i) - constraints.upper(i)) > 0.0) {
        iter.active_upper.push_back(static_cast<int>(i));
        active[i] = true;
        result.q(i) = constraints.upper(i);
      }
    }

    for (int inner = 0; inner < options.max_inner_iterations; ++inner) {
      g = objective.gradient(result.q);
      double free_norm2 = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!active[i]) {
          free_norm2 += g(i) * g(i);
        }
      }
      if (std::sqrt(free_norm2) <= options.tolerance) {
        break;
      }
      const NewtonStepResult step = newton_cg_step(objective, result.q, active, constraints, options.newton);
      iter.cg_iterations += step.cg_iterations;
      if (!step.accepted) {
        break;
      }
      result.q = step.q;
      ++iter.newton_steps;
      iter.inner_values.push_back(step.value_after);
    }

    g = objective.gradient(result.q);
    iter.value = objective.value(result.q);
    iter.projected_gradient_norm = constraints.projected_gradient(result.q, g).norm();
    result.value = iter.value;
    result.projected_gradient_norm = iter.projected_gradient_norm;
    result.total_newton_steps += iter.newton_steps;
    pg_history.push_back(iter.projected_gradient_norm);
    const bool repeated = have_prev && iter.active_lower == prev_lower && iter.active_upper == prev_upper;
    prev_lower = iter.active_lower;
    prev_upper = iter.active_upper;
    have_prev = true;
    result.history.push_back(std::move(iter));
    if (repeated && result.projected_gradient_norm <= options.tolerance) {
      return result;
    }
  }
  throw PdasError("pdas_solve: no convergence within " + std::to_string(options.max_outer_iterations) +
                      " outer iterations (projected gradient norm " + std::to_string(result.projected_gradient_norm) +
                      ")",
                  std::move(pg_history), result);
}

}  // namespace porous::ident
