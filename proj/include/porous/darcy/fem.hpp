#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "porous/darcy/mesh.hpp"
#include "porous/darcy/permeability.hpp"
#include "porous/linear_solver.hpp"

namespace porous::darcy {

/// Source/sink density f_p(x, y); must integrate to zero over the domain.
using SourceField = std::function<double(double, double)>;

/// Weights of the two local projection terms:
///   velocity * h_M^2 (kappa_M grad u, kappa_M grad v) + pressure * (kappa_M grad p, kappa_M grad q).
struct StabilizationWeights {
  double velocity = 1.0;
  double pressure = 1.0;
};

/// Velocity and pressure values at a point.
struct FlowSample {
  double ux = 0.0;
  double uy = 0.0;
  double p = 0.0;
};

/// Nodal Q1 velocity/pressure pair. Velocity is stored interleaved
/// (ux_0, uy_0, ux_1, uy_1, ...); pressure has zero mean over the domain.
struct FemState {
  std::vector<double> velocity;
  std::vector<double> pressure;

  std::size_t num_vertices() const { return pressure.size(); }
  double ux(std::size_t v) const { return velocity[2 * v]; }
  double uy(std::size_t v) const { return velocity[2 * v + 1]; }

  /// Full dof vector in system order: velocity block, then pressure block.
  Eigen::VectorXd stacked() const;
  static FemState from_stacked(const Eigen::VectorXd& x);
};

/// Global dof numbering: ux of vertex v -> 2v, uy -> 2v + 1, p -> 2N + v.
struct DofLayout {
  int num_vertices = 0;
  int ux(int v) const { return 2 * v; }
  int uy(int v) const { return 2 * v + 1; }
  int p(int v) const { return 2 * num_vertices + v; }
  int size() const { return 3 * num_vertices; }
};

/// Removes the patch mean: returns v - (sum w v) / (sum w), i.e. kappa_M = Id - Pi_M
/// applied to values sampled at the quadrature points of a patch.
std::vector<double> fluctuation(std::span<const double> values, std::span<const double> weights);

struct QuadraturePoint {
  Point2 x;
  double weight = 0.0;
};

/// 2x2 Gauss points of the four cells of a patch (16 points, weights sum to the patch area).
std::vector<QuadraturePoint> patch_quadrature(const StructuredQuadMesh& mesh, int patch);

/// Darcy operator with the inverse permeability left as a parameter.
///
/// Holds the q-independent part (divergence coupling, stabilization) and the
/// per-parameter mass blocks so that A(q) = A_0 + sum_k q_k M_k can be formed
/// cheaply for many q. Parameter 2i scales the x-velocity mass on subdomain i,
/// parameter 2i + 1 the y-velocity mass. Normal velocity on the boundary is
/// constrained to zero and the pressure of vertex 0 is pinned; the matching
/// rows and columns of A(q) are identity rows.
class DarcyDiscretization {
 public:
  DarcyDiscretization(StructuredQuadMesh mesh, Partition partition, const SourceField& source,
                      StabilizationWeights weights = {});

  const StructuredQuadMesh& mesh() const { return mesh_; }
  const Partition& partition() const { return partition_; }
  const std::vector<int>& cell_subdomain() const { return cell_subdomain_; }
  const StabilizationWeights& weights() const { return weights_; }
  DofLayout layout() const { return {mesh_.num_vertices()}; }
  std::size_t num_parameters() const { return 2 * partition_.size(); }
  std::size_t num_dofs() const { return static_cast<std::size_t>(layout().size()); }

  /// A(q). Throws InvalidArgument for a wrong length or a non-positive entry.
  Eigen::SparseMatrix<double> matrix(std::span<const double> q) const;
  /// Right-hand side after removing the quadrature-level source mean.
  const Eigen::VectorXd& rhs() const { return rhs_; }
  /// |integral of f| relative to the integral of |f|, before the mean was removed.
  double compatibility_defect() const { return compatibility_defect_; }

  /// (sum_k dq_k M_k) x.
  Eigen::VectorXd apply_parameter_derivative(std::span<const double> dq, const Eigen::VectorXd& x) const;
  /// (y^T M_k x)_k.
  Eigen::VectorXd parameter_sensitivities(const Eigen::VectorXd& y, const Eigen::VectorXd& x) const;

  /// Maps a raw solution of A(q) x = b to the zero-mean gauge; linear in x.
  Eigen::VectorXd gauge(const Eigen::VectorXd& raw) const;
  Eigen::VectorXd gauge_transpose(const Eigen::VectorXd& y) const;

  bool is_constrained(int dof) const { return constrained_[dof] != 0; }
  /// Integral of each pressure basis function.
  const std::vector<double>& basis_integrals() const { return basis_integrals_; }

  /// Velocity-velocity and pressure-pressure stabilization blocks (unconstrained).
  const Eigen::SparseMatrix<double>& velocity_stabilization() const { return stab_u_; }
  const Eigen::SparseMatrix<double>& pressure_stabilization() const { return stab_p_; }

 private:
  struct ParameterEntry {
    int row;
    int col;
    int slot;  // index into the value array of base_
    double value;
  };

  StructuredQuadMesh mesh_;
  Partition partition_;
  StabilizationWeights weights_;
  std::vector<int> cell_subdomain_;
  std::vector<char> constrained_;
  Eigen::SparseMatrix<double> base_;
  std::vector<std::vector<ParameterEntry>> parameter_entries_;
  Eigen::VectorXd rhs_;
  double compatibility_defect_ = 0.0;
  std::vector<double> basis_integrals_;
  Eigen::SparseMatrix<double> stab_u_;
  Eigen::SparseMatrix<double> stab_p_;
};

/// Assembled saddle-point system for one permeability field.
struct DarcySystem {
  std::shared_ptr<const DarcyDiscretization> discretization;
  std::vector<double> parameters;
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

/// Galerkin + local projection stabilized Q1/Q1 system. Throws InvalidArgument
/// for non-positive permeability entries or a partition that does not fit the mesh.
DarcySystem assemble_darcy(const StructuredQuadMesh& mesh, const PermeabilityField& perm, const SourceField& f,
                           StabilizationWeights weights = {});

/// Solves the system and shifts pressure to zero mean. Throws InvalidArgument
/// if the source violates the compatibility condition and NumericalError if
/// the residual tolerance is not met.
FemState solve_state(const DarcySystem& system, const LinearSolverOptions& options = {});

/// Value of the Q1 fields at (x, y).
FlowSample evaluate(const StructuredQuadMesh& mesh, const FemState& state, double x, double y);

/// Vertex indices and bilinear weights for evaluating at (x, y).
std::array<std::pair<int, double>, 4> interpolation_weights(const StructuredQuadMesh& mesh, double x, double y);

/// u = (sin(pi x) cos(pi y), cos(pi x) sin(pi y)) / pi, p = cos(pi x) cos(pi y) / pi^2.
/// Solves the Darcy problem with K^-1 = Id, f = 2 cos(pi x) cos(pi y) and u.n = 0 on the unit square.
FlowSample manufactured_solution(double x, double y);
double manufactured_source(double x, double y);

struct L2Errors {
  double velocity = 0.0;
  double pressure = 0.0;
};

using ExactSolution = std::function<FlowSample(double, double)>;

/// L2 norms of the error, integrated with 3x3 Gauss points per cell.
L2Errors l2_errors(const StructuredQuadMesh& mesh, const FemState& state, const ExactSolution& exact);

}  // namespace porous::darcy
