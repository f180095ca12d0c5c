#pragma once

#include <cstddef>
#include <memory>

#include <Eigen/Sparse>

namespace porous {

struct LinearSolverOptions {
  /// Required relative residual ||A x - b|| / ||b||.
  double tolerance = 1e-10;
  /// Systems up to this many unknowns are factorized directly.
  std::size_t direct_limit = 100000;
  int max_iterations = 10000;
};

/// Sparse LU for moderate sizes, ILUT-preconditioned BiCGSTAB above the
/// direct limit. Solves with A and with A^T reuse the same setup.
class LinearSolver {
 public:
  using Matrix = Eigen::SparseMatrix<double>;

  explicit LinearSolver(LinearSolverOptions options = {});
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  /// Throws NumericalError when the factorization fails.
  void factorize(const Matrix& a);

  /// Throws NumericalError when the residual tolerance is not met.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& b) const;

  bool is_direct() const;
  const LinearSolverOptions& options() const { return options_; }

 private:
  struct Impl;
  LinearSolverOptions options_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace porous
