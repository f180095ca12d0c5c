#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "porous/darcy/fem.hpp"
#include "porous/ident/optimizer.hpp"
#include "porous/random.hpp"

namespace porous::ident {

/// Parameters (a_1, b_1, a_2, b_2, ...): entry 2i scales the first diagonal
/// component of the inverse permeability on subdomain i, entry 2i + 1 the second.
using ParameterVector = Eigen::VectorXd;

/// Throws InvalidArgument for a length other than 2 * partition size or an
/// entry below its lower bound.
darcy::PermeabilityField perm_from_params(const ParameterVector& q, const darcy::Partition& partition,
                                          const ConstraintSet& constraints);
darcy::PermeabilityField perm_from_params(const ParameterVector& q, const darcy::Partition& partition);

/// Which scalars are recorded at each measurement point.
struct MeasuredQuantities {
  bool ux = true;
  bool uy = true;
  bool p = true;
  int count() const { return int(ux) + int(uy) + int(p); }
};

class ObservationOperator {
 public:
  enum class Kind { identity, point_set };

  /// Full dof vector (velocity block, then pressure block).
  static ObservationOperator identity();
  /// FE evaluations at the given points. Throws InvalidArgument when the
  /// point list is empty or no quantity is selected.
  static ObservationOperator point_set(std::vector<darcy::Point2> points, MeasuredQuantities quantities = {});
  /// nx_points x ny_points lattice at cell centres of a uniform subdivision of
  /// the domain; with 8 x 4 points on a 4 x 4 partition no point touches a
  /// subdomain edge.
  static ObservationOperator lattice(const darcy::Rectangle& domain, int nx_points = 8, int ny_points = 4,
                                     MeasuredQuantities quantities = {});

  Kind kind() const { return kind_; }
  const std::vector<darcy::Point2>& points() const { return points_; }
  const MeasuredQuantities& quantities() const { return quantities_; }

  /// Rows ordered point by point, (u_x, u_y, p) within a point. Throws
  /// InvalidArgument when a point lies outside the mesh domain.
  Eigen::SparseMatrix<double> matrix(const darcy::StructuredQuadMesh& mesh) const;
  std::size_t output_size(const darcy::StructuredQuadMesh& mesh) const;

 private:
  Kind kind_ = Kind::identity;
  std::vector<darcy::Point2> points_;
  MeasuredQuantities quantities_;
};

/// Regularized output least squares: minimize |C S(q) - z|^2 + alpha/2 |q|^2
/// subject to the box constraints.
struct InverseProblem {
  darcy::StructuredQuadMesh mesh;
  darcy::Partition partition;
  darcy::SourceField source;
  ObservationOperator observation;
  Eigen::VectorXd data;
  double alpha = 0.0;
  ConstraintSet constraints;
  std::optional<ParameterVector> reference;
  darcy::StabilizationWeights stabilization;
  LinearSolverOptions solver;

  std::size_t num_parameters() const { return 2 * partition.size(); }
  /// Throws InvalidArgument on inconsistent sizes or a negative alpha.
  void validate() const;
};

/// Reduced cost j(q) with adjoint gradient and second-order adjoint
/// Hessian-vector products. Caches the factorization, state and adjoint of the
/// last parameter vector; not safe for concurrent use.
class ReducedObjective final : public Objective {
 public:
  explicit ReducedObjective(const InverseProblem& problem);
  ReducedObjective(std::shared_ptr<const darcy::DarcyDiscretization> discretization,
                   Eigen::SparseMatrix<double> observation, Eigen::VectorXd data, double alpha,
                   LinearSolverOptions solver = {});

  std::size_t size() const override { return discretization_->num_parameters(); }
  double value(const Eigen::VectorXd& q) override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& q) override;
  Eigen::VectorXd hessian_vector(const Eigen::VectorXd& q, const Eigen::VectorXd& dq) override;

  /// Gauged state S(q) as a stacked dof vector.
  Eigen::VectorXd state(const Eigen::VectorXd& q);
  /// C S(q).
  Eigen::VectorXd observe(const Eigen::VectorXd& q);

  const darcy::DarcyDiscretization& discretization() const { return *discretization_; }
  const Eigen::SparseMatrix<double>& observation() const { return c_; }
  double alpha() const { return alpha_; }
  /// Number of forward factorizations so far.
  int factorizations() const { return factorizations_; }

 private:
  void update_state(const Eigen::VectorXd& q);
  void update_adjoint(const Eigen::VectorXd& q);

  std::shared_ptr<const darcy::DarcyDiscretization> discretization_;
  Eigen::SparseMatrix<double> c_;
  Eigen::VectorXd z_;
  double alpha_;
  LinearSolverOptions solver_options_;

  std::optional<Eigen::VectorXd> q_cached_;
  std::unique_ptr<LinearSolver> solver_;
  Eigen::VectorXd raw_;       // A(q)^-1 b
  Eigen::VectorXd residual_;  // C G raw - z
  bool adjoint_valid_ = false;
  Eigen::VectorXd adjoint_;
  int factorizations_ = 0;
};

/// z = C S(q_ref) plus i.i.d. N(0, noise^2) entries drawn from mt19937_64(seed).
Eigen::VectorXd generate_synthetic_data(const darcy::DarcyDiscretization& discretization,
                                        const ObservationOperator& observation, const ParameterVector& reference,
                                        double noise = 0.0, std::uint64_t seed = 0,
                                        const LinearSolverOptions& solver = {});

struct RelativeErrors {
  double a = 0.0;
  double b = 0.0;
};

/// |q^A - q^A_ref| / |q^A_ref| and the same for the second components.
RelativeErrors relative_parameter_errors(const ParameterVector& q, const ParameterVector& reference);

/// Seed of the shipped reference parameters.
inline constexpr std::uint64_t kDefaultReferenceSeed = 20100917;

/// n entries log-uniform in [1, 10] from mt19937_64(seed).
ParameterVector default_reference_parameters(std::size_t n, std::uint64_t seed = kDefaultReferenceSeed);

}  // namespace porous::ident
