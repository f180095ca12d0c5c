#include "porous/linear_solver.hpp"

#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "porous/error.hpp"

namespace porous {

struct LinearSolver::Impl {
  Matrix a;
  Matrix at;
  bool direct = true;
  bool analyzed = false;
  Eigen::SparseLU<Matrix, Eigen::COLAMDOrdering<int>> lu;
  Eigen::BiCGSTAB<Matrix, Eigen::IncompleteLUT<double>> iterative;
  Eigen::BiCGSTAB<Matrix, Eigen::IncompleteLUT<double>> iterative_t;
};

LinearSolver::LinearSolver(LinearSolverOptions options) : options_(options), impl_(std::make_unique<Impl>()) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

bool LinearSolver::is_direct() const { return impl_->direct; }

void LinearSolver::factorize(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw InvalidArgument("LinearSolver: matrix is not square");
  }
  impl_->a = a;
  impl_->a.makeCompressed();
  impl_->direct = static_cast<std::size_t>(a.rows()) <= options_.direct_limit;
  if (impl_->direct) {
    // The sparsity pattern of a given discretization never changes, so the
    // column ordering is computed once.
    if (!impl_->analyzed || impl_->lu.rows() != a.rows()) {
      impl_->lu.analyzePattern(impl_->a);
      impl_->analyzed = true;
    }
    impl_->lu.factorize(impl_->a);
    if (impl_->lu.info() != Eigen::Success) {
      throw NumericalError("LinearSolver: sparse LU failed: " + impl_->lu.lastErrorMessage());
    }
  } else {
    impl_->at = impl_->a.transpose();
    for (auto* solver : {&impl_->iterative, &impl_->iterative_t}) {
      solver->setTolerance(0.1 * options_.tolerance);
      solver->setMaxIterations(options_.max_iterations);
    }
    impl_->iterative.compute(impl_->a);
    impl_->iterative_t.compute(impl_->at);
    if (impl_->iterative.info() != Eigen::Success || impl_->iterative_t.info() != Eigen::Success) {
      throw NumericalError("LinearSolver: ILUT preconditioner setup failed");
    }
  }
}

namespace {

template <class Apply, class Solve>
Eigen::VectorXd solve_checked(const Apply& apply, const Solve& solve, const Eigen::VectorXd& b, double tol) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    return Eigen::VectorXd::Zero(b.size());
  }
  Eigen::VectorXd x = solve(b);
  Eigen::VectorXd r = b - apply(x);
  std::vector<double> history{r.norm() / bnorm};
  // One step of iterative refinement recovers digits lost to pivoting.
  if (history.back() > tol) {
    x += solve(r);
    r = b - apply(x);
    history.push_back(r.norm() / bnorm);
  }
  if (!(history.back() <= tol)) {
    throw NumericalError("LinearSolver: relative residual " + std::to_string(history.back()) +
                             " above tolerance " + std::to_string(tol),
                         history);
  }
  return x;
}

}  // namespace

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& b) const {
  const Impl& im = *impl_;
  const auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return im.a * x; };
  if (im.direct) {
    return solve_checked(apply, [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return im.lu.solve(r); }, b,
                         options_.tolerance);
  }
  return solve_checked(
      apply, [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return im.iterative.solve(r); }, b,
      options_.tolerance);
}

Eigen::VectorXd LinearSolver::solve_transpose(const Eigen::VectorXd& b) const {
  // SparseLU::transpose() is non-const; the view does not modify the factors.
  Impl& im = *impl_;
  const auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return im.a.transpose() * x; };
  if (im.direct) {
    return solve_checked(
        apply, [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return im.lu.transpose().solve(r); }, b,
        options_.tolerance);
  }
  return solve_checked(
      apply, [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return im.iterative_t.solve(r); }, b,
      options_.tolerance);
}

}  // namespace porous
