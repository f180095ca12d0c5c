#include "porous/ident/problem.hpp"

#include <cmath>
#include <random>
#include <string>

#include "porous/error.hpp"

namespace porous::ident {

darcy::PermeabilityField perm_from_params(const ParameterVector& q, const darcy::Partition& partition,
                                          const ConstraintSet& constraints) {
  if (q.size() != static_cast<Eigen::Index>(2 * partition.size())) {
    throw InvalidArgument("perm_from_params: expected " + std::to_string(2 * partition.size()) +
                          " parameters for " + std::to_string(partition.size()) + " subdomains, got " +
                          std::to_string(q.size()));
  }
  if (constraints.size() != static_cast<std::size_t>(q.size())) {
    throw InvalidArgument("perm_from_params: constraint set has the wrong length");
  }
  std::vector<std::array<double, 2>> entries(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) {
    for (int c = 0; c < 2; ++c) {
      const auto k = static_cast<Eigen::Index>(2 * i + c);
      if (!(q(k) >= constraints.lower(k) && q(k) <= constraints.upper(k))) {
        throw InvalidArgument("perm_from_params: parameter " + std::to_string(k) + " = " + std::to_string(q(k)) +
                              " is infeasible");
      }
      entries[i][c] = q(k);
    }
  }
  return {partition, std::move(entries)};
}

darcy::PermeabilityField perm_from_params(const ParameterVector& q, const darcy::Partition& partition) {
  return perm_from_params(q, partition, ConstraintSet::standard(static_cast<std::size_t>(q.size())));
}

ObservationOperator ObservationOperator::identity() { return {}; }

ObservationOperator ObservationOperator::point_set(std::vector<darcy::Point2> points, MeasuredQuantities quantities) {
  if (points.empty()) {
    throw InvalidArgument("observation: point set is empty");
  }
  if (quantities.count() == 0) {
    throw InvalidArgument("observation: no measured quantity selected");
  }
  ObservationOperator op;
  op.kind_ = Kind::point_set;
  op.points_ = std::move(points);
  op.quantities_ = quantities;
  return op;
}

ObservationOperator ObservationOperator::lattice(const darcy::Rectangle& domain, int nx_points, int ny_points,
                                                 MeasuredQuantities quantities) {
  if (nx_points < 1 || ny_points < 1) {
    throw InvalidArgument("observation: lattice needs at least one point per axis");
  }
  std::vector<darcy::Point2> pts;
  for (int j = 0; j < ny_points; ++j) {
    for (int i = 0; i < nx_points; ++i) {
      pts.push_back({domain.x0 + (i + 0.5) * domain.width() / nx_points,
                     domain.y0 + (j + 0.5) * domain.height() / ny_points});
    }
  }
  return point_set(std::move(pts), quantities);
}

std::size_t ObservationOperator::output_size(const darcy::StructuredQuadMesh& mesh) const {
  if (kind_ == Kind::identity) {
    return 3 * static_cast<std::size_t>(mesh.num_vertices());
  }
  return points_.size() * static_cast<std::size_t>(quantities_.count());
}

Eigen::SparseMatrix<double> ObservationOperator::matrix(const darcy::StructuredQuadMesh& mesh) const {
  const int n = 3 * mesh.num_vertices();
  if (kind_ == Kind::identity) {
    Eigen::SparseMatrix<double> id(n, n);
    id.setIdentity();
    return id;
  }
  const darcy::DofLayout dofs{mesh.num_vertices()};
  std::vector<Eigen::Triplet<double>> t;
  int row = 0;
  for (const auto& pt : points_) {
    if (!mesh.domain().contains(pt.x, pt.y)) {
      throw InvalidArgument("observation: point (" + std::to_string(pt.x) + ", " + std::to_string(pt.y) +
                            ") lies outside the domain");
    }
    const auto w = darcy::interpolation_weights(mesh, pt.x, pt.y);
    const auto add = [&](auto dof_of) {
      for (const auto& [v, wv] : w) {
        if (wv != 0.0) {
          t.emplace_back(row, dof_of(v), wv);
        }
      }
      ++row;
    };
    if (quantities_.ux) {
      add([&](int v) { return dofs.ux(v); });
    }
    if (quantities_.uy) {
      add([&](int v) { return dofs.uy(v); });
    }
    if (quantities_.p) {
      add([&](int v) { return dofs.p(v); });
    }
  }
  Eigen::SparseMatrix<double> c(row, n);
  c.setFromTriplets(t.begin(), t.end());
  return c;
}

void InverseProblem::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("inverse problem: alpha must be finite and non-negative");
  }
  constraints.validate();
  if (constraints.size() != num_parameters()) {
    throw InvalidArgument("inverse problem: constraint set has " + std::to_string(constraints.size()) +
                          " entries, expected " + std::to_string(num_parameters()));
  }
  if (static_cast<std::size_t>(data.size()) != observation.output_size(mesh)) {
    throw InvalidArgument("inverse problem: data has " + std::to_string(data.size()) + " entries, observation yields " +
                          std::to_string(observation.output_size(mesh)));
  }
  if (reference && static_cast<std::size_t>(reference->size()) != num_parameters()) {
    throw InvalidArgument("inverse problem: reference parameters have the wrong length");
  }
}

ReducedObjective::ReducedObjective(const InverseProblem& problem)
    : ReducedObjective(
          (problem.validate(),
           std::make_shared<const darcy::DarcyDiscretization>(problem.mesh, problem.partition, problem.source,
                                                              problem.stabilization)),
          problem.observation.matrix(problem.mesh), problem.data, problem.alpha, problem.solver) {}

ReducedObjective::ReducedObjective(std::shared_ptr<const darcy::DarcyDiscretization> discretization,
                                   Eigen::SparseMatrix<double> observation, Eigen::VectorXd data, double alpha,
                                   LinearSolverOptions solver)
    : discretization_(std::move(discretization)),
      c_(std::move(observation)),
      z_(std::move(data)),
      alpha_(alpha),
      solver_options_(solver) {
  if (!discretization_) {
    throw InvalidArgument("reduced objective: missing discretization");
  }
  if (c_.cols() != static_cast<Eigen::Index>(discretization_->num_dofs()) || c_.rows() != z_.size()) {
    throw InvalidArgument("reduced objective: observation matrix, state and data sizes are inconsistent");
  }
  if (discretization_->compatibility_defect() > 1e-8) {
    throw InvalidArgument("reduced objective: source violates the compatibility condition");
  }
}

void ReducedObjective::update_state(const Eigen::VectorXd& q) {
  if (q_cached_ && q_cached_->size() == q.size() && *q_cached_ == q) {
    return;
  }
  if (q.size() != static_cast<Eigen::Index>(size())) {
    throw InvalidArgument("reduced objective: expected " + std::to_string(size()) + " parameters, got " +
                          std::to_string(q.size()));
  }
  q_cached_.reset();
  if (!solver_) {
    solver_ = std::make_unique<LinearSolver>(solver_options_);
  }
  solver_->factorize(discretization_->matrix(std::span<const double>(q.data(), static_cast<std::size_t>(q.size()))));
  ++factorizations_;
  raw_ = solver_->solve(discretization_->rhs());
  residual_ = c_ * discretization_->gauge(raw_) - z_;
  q_cached_ = q;
  adjoint_valid_ = false;
}

void ReducedObjective::update_adjoint(const Eigen::VectorXd& q) {
  update_state(q);
  if (adjoint_valid_) {
    return;
  }
  const Eigen::VectorXd rhs = discretization_->gauge_transpose(Eigen::VectorXd(c_.transpose() * residual_)) * 2.0;
  adjoint_ = solver_->solve_transpose(rhs);
  adjoint_valid_ = true;
}

double ReducedObjective::value(const Eigen::VectorXd& q) {
  update_state(q);
  return residual_.squaredNorm() + 0.5 * alpha_ * q.squaredNorm();
}

Eigen::VectorXd ReducedObjective::gradient(const Eigen::VectorXd& q) {
  update_adjoint(q);
  return -discretization_->parameter_sensitivities(adjoint_, raw_) + alpha_ * q;
}

Eigen::VectorXd ReducedObjective::hessian_vector(const Eigen::VectorXd& q, const Eigen::VectorXd& dq) {
  if (dq.size() != q.size()) {
    throw InvalidArgument("hessian_vector: direction has the wrong length");
  }
  update_adjoint(q);
  if (dq.isZero(0.0)) {
    return Eigen::VectorXd::Zero(q.size());
  }
  const std::span<const double> dqs(dq.data(), static_cast<std::size_t>(dq.size()));
  // tangent: A dx = -(dA) x
  const Eigen::VectorXd dx = solver_->solve(-discretization_->apply_parameter_derivative(dqs, raw_));
  // dual tangent: A^T dl = 2 G^T C^T C G dx - (dA)^T l, with dA symmetric
  const Eigen::VectorXd cdx = c_ * discretization_->gauge(dx);
  const Eigen::VectorXd rhs = 2.0 * discretization_->gauge_transpose(Eigen::VectorXd(c_.transpose() * cdx)) -
                              discretization_->apply_parameter_derivative(dqs, adjoint_);
  const Eigen::VectorXd dl = solver_->solve_transpose(rhs);
  return -discretization_->parameter_sensitivities(dl, raw_) - discretization_->parameter_sensitivities(adjoint_, dx) +
         alpha_ * dq;
}

Eigen::VectorXd ReducedObjective::state(const Eigen::VectorXd& q) {
  update_state(q);
  return discretization_->gauge(raw_);
}

Eigen::VectorXd ReducedObjective::observe(const Eigen::VectorXd& q) {
  update_state(q);
  return residual_ + z_;
}

Eigen::VectorXd generate_synthetic_data(const darcy::DarcyDiscretization& discretization,
                                        const ObservationOperator& observation, const ParameterVector& reference,
                                        double noise, std::uint64_t seed, const LinearSolverOptions& solver) {
  if (!(noise >= 0.0)) {
    throw InvalidArgument("synthetic data: noise level must be non-negative");
  }
  if (reference.size() != static_cast<Eigen::Index>(discretization.num_parameters())) {
    throw InvalidArgument("synthetic data: reference parameters have the wrong length");
  }
  if (!(reference.array() > 0.0).all()) {
    throw InvalidArgument("synthetic data: reference parameters must be positive");
  }
  LinearSolver ls(solver);
  ls.factorize(discretization.matrix(std::span<const double>(reference.data(), static_cast<std::size_t>(reference.size()))));
  const Eigen::VectorXd x = discretization.gauge(ls.solve(discretization.rhs()));
  Eigen::VectorXd z = observation.matrix(discretization.mesh()) * x;
  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, noise);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z(i) += normal(rng);
    }
  }
  return z;
}

RelativeErrors relative_parameter_errors(const ParameterVector& q, const ParameterVector& reference) {
  if (q.size() != reference.size() || q.size() % 2 != 0 || q.size() == 0) {
    throw InvalidArgument("relative_parameter_errors: vectors must have equal, even, non-zero length");
  }
  const Eigen::Index m = q.size() / 2;
  const auto a = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<2>>(q.data(), m);
  const auto b = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<2>>(q.data() + 1, m);
  const auto ra = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<2>>(reference.data(), m);
  const auto rb = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<2>>(reference.data() + 1, m);
  if (ra.norm() == 0.0 || rb.norm() == 0.0) {
    throw InvalidArgument("relative_parameter_errors: reference component has zero norm");
  }
  return {(a - ra).norm() / ra.norm(), (b - rb).norm() / rb.norm()};
}

ParameterVector default_reference_parameters(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParameterVector q(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    q(i) = std::pow(10.0, unit_uniform(rng()));
  }
  return q;
}

}  // namespace porous::ident
