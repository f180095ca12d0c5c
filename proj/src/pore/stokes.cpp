#include "porous/pore/stokes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "porous/error.hpp"

namespace porous::pore {

namespace {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Minres {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned MINRES for a symmetric (possibly singular but consistent)
/// system; the preconditioner must be symmetric positive definite.
template <class Apply, class Precondition>
Minres minres(const Apply& apply, const Precondition& precondition, const Eigen::VectorXd& b, Eigen::VectorXd& x,
              double tol, int max_iterations) {
  Minres out;
  const Eigen::Index n = b.size();
  x.setZero(n);
  Eigen::VectorXd r1 = b;
  Eigen::VectorXd y = precondition(r1);
  const double beta1 = std::sqrt(std::max(0.0, r1.dot(y)));
  if (beta1 == 0.0) {
    return out;
  }
  Eigen::VectorXd r2 = r1;
  Eigen::VectorXd v(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w1(n);
  Eigen::VectorXd w2 = Eigen::VectorXd::Zero(n);
  double oldb = 0.0;
  double beta = beta1;
  double dbar = 0.0;
  double epsln = 0.0;
  double phibar = beta1;
  double cs = -1.0;
  double sn = 0.0;
  for (int k = 1; k <= max_iterations; ++k) {
    v = y / beta;
    y = apply(v);
    if (k >= 2) {
      y -= (beta / oldb) * r1;
    }
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1.swap(r2);
    r2 = y;
    y = precondition(r2);
    oldb = beta;
    beta = std::sqrt(std::max(0.0, r2.dot(y)));
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar *= sn;
    w1.swap(w2);
    w2.swap(w);
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;
    out.iterations = k;
    out.relative_residual = phibar / beta1;
    if (out.relative_residual <= tol || beta == 0.0) {
      break;
    }
  }
  return out;
}

std::size_t shift(const VoxelGrid& g, std::size_t c, int axis, int s) {
  int ijk[3] = {static_cast<int>(c % g.n[0]), static_cast<int>((c / g.n[0]) % g.n[1]),
                static_cast<int>(c / (static_cast<std::size_t>(g.n[0]) * g.n[1]))};
  ijk[axis] = ((ijk[axis] + s) % g.n[axis] + g.n[axis]) % g.n[axis];
  return g.index(ijk[0], ijk[1], ijk[2]);
}

}  // namespace

StokesField solve_stokes(const VoxelGrid& grid, const StokesOptions& options) {
  if (!(options.viscosity > 0.0)) {
    throw InvalidArgument("solve_stokes: viscosity must be positive");
  }
  if (!(options.tolerance > 0.0)) {
    throw InvalidArgument("solve_stokes: tolerance must be positive");
  }
  if (grid.fluid.size() != grid.size()) {
    throw InvalidArgument("solve_stokes: mask size does not match the grid");
  }
  if (!percolates(grid, 0)) {
    throw InvalidArgument("solve_stokes: fluid phase does not percolate along the x axis");
  }
  const std::size_t cells = grid.size();
  const double vol = grid.cell_volume();
  const double mu = options.viscosity;

  std::array<std::vector<int>, 3> face_id;
  int nu = 0;
  for (int a = 0; a < 3; ++a) {
    face_id[a].assign(cells, -1);
    for (std::size_t c = 0; c < cells; ++c) {
      if (grid.fluid[c] != 0 && grid.fluid[shift(grid, c, a, -1)] != 0) {
        face_id[a][c] = nu++;
      }
    }
  }
  std::vector<int> cell_id(cells, -1);
  int np = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    if (grid.fluid[c] != 0) {
      cell_id[c] = np++;
    }
  }

  std::vector<Eigen::Triplet<double>> ta;
  std::vector<Eigen::Triplet<double>> tb;
  ta.reserve(static_cast<std::size_t>(nu) * 7);
  tb.reserve(static_cast<std::size_t>(nu) * 2);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(nu);
  for (int a = 0; a < 3; ++a) {
    for (std::size_t c = 0; c < cells; ++c) {
      const int row = face_id[a][c];
      if (row < 0) {
        continue;
      }
      double diag = 0.0;
      for (int d = 0; d < 3; ++d) {
        const double coef = mu * vol / (grid.spacing[d] * grid.spacing[d]);
        for (int s : {-1, 1}) {
          const std::size_t nb = shift(grid, c, d, s);
          const int col = face_id[a][nb];
          diag += coef;
          if (col >= 0) {
            ta.emplace_back(row, col, -coef);
          } else if (grid.fluid[nb] == 0 && grid.fluid[shift(grid, nb, a, -1)] == 0) {
            // wall between this face and a fully solid neighbour face: ghost = -u
            diag += coef;
          }
        }
      }
      ta.emplace_back(row, row, diag);
      const double div = vol / grid.spacing[a];
      tb.emplace_back(cell_id[c], row, div);
      tb.emplace_back(cell_id[shift(grid, c, a, -1)], row, -div);
      if (a == 0) {
        f(row) = vol * options.gradient;
      }
    }
  }
  RowMatrix amat(nu, nu);
  amat.setFromTriplets(ta.begin(), ta.end());
  ta = {};
  RowMatrix bmat(np, nu);
  bmat.setFromTriplets(tb.begin(), tb.end());
  tb = {};
  const RowMatrix bt = bmat.transpose();
  Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>> ic;
  {
    Eigen::SparseMatrix<double> acol = amat;
    ic.compute(acol);
    if (ic.info() != Eigen::Success) {
      throw NumericalError("solve_stokes: incomplete Cholesky of the momentum block failed");
    }
  }
  const double pressure_scale = mu / vol;

  const auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(x.size());
    y.head(nu).noalias() = amat * x.head(nu);
    y.head(nu).noalias() += bt * x.tail(np);
    y.tail(np).noalias() = bmat * x.head(nu);
    return y;
  };
  const auto precondition = [&](const Eigen::VectorXd& r) {
    Eigen::VectorXd z(r.size());
    z.head(nu) = ic.solve(r.head(nu));
    z.tail(np) = pressure_scale * r.tail(np);
    return z;
  };

  StokesField field;
  field.n = grid.n;
  field.spacing = grid.spacing;
  field.viscosity = mu;
  field.gradient = options.gradient;
  for (auto& v : field.velocity) {
    v.assign(cells, 0.0);
  }
  field.pressure.assign(cells, 0.0);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(nu + np);
  b.head(nu) = f;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nu + np);
  const double fnorm = f.norm();
  const double hmin = std::min({grid.spacing[0], grid.spacing[1], grid.spacing[2]});
  double inner_tol = 0.1 * options.tolerance;
  const auto converged = [&]() {
    if (fnorm == 0.0) {
      field.momentum_residual = 0.0;
      field.divergence = 0.0;
      return true;
    }
    const Eigen::VectorXd r = b - apply(x);
    field.momentum_residual = r.head(nu).norm() / fnorm;
    const double umax = x.head(nu).cwiseAbs().maxCoeff();
    field.divergence = umax > 0.0 ? r.tail(np).cwiseAbs().maxCoeff() / vol * hmin / umax : 0.0;
    return field.momentum_residual <= options.tolerance && field.divergence <= options.tolerance;
  };
  while (!converged()) {
    if (field.iterations >= options.max_iterations || inner_tol < 1e-16) {
      throw NumericalError("solve_stokes: no convergence after " + std::to_string(field.iterations) +
                               " MINRES iterations (momentum residual " + std::to_string(field.momentum_residual) +
                               ", divergence " + std::to_string(field.divergence) + ")",
                           field.residual_history);
    }
    const Eigen::VectorXd r = b - apply(x);
    Eigen::VectorXd dx;
    const Minres m = minres(apply, precondition, r, dx, inner_tol * b.norm() / std::max(r.norm(), 1e-300),
                            options.max_iterations - field.iterations);
    x += dx;
    field.iterations += m.iterations;
    field.residual_history.push_back(m.relative_residual);
    inner_tol *= 0.1;
  }

  double pmean = 0.0;
  for (int i = 0; i < np; ++i) {
    pmean += x(nu + i);
  }
  pmean = np > 0 ? pmean / np : 0.0;
  for (int a = 0; a < 3; ++a) {
    for (std::size_t c = 0; c < cells; ++c) {
      if (face_id[a][c] >= 0) {
        field.velocity[a][c] = x(face_id[a][c]);
      }
    }
  }
  for (std::size_t c = 0; c < cells; ++c) {
    if (cell_id[c] >= 0) {
      field.pressure[c] = x(nu + cell_id[c]) - pmean;
    }
  }
  return field;
}

double relative_divergence(const StokesField& field, const VoxelGrid& grid) {
  double umax = 0.0;
  for (const auto& v : field.velocity) {
    for (double u : v) {
      umax = std::max(umax, std::abs(u));
    }
  }
  if (umax == 0.0) {
    return 0.0;
  }
  double dmax = 0.0;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (grid.fluid[c] == 0) {
      continue;
    }
    double div = 0.0;
    for (int a = 0; a < 3; ++a) {
      div += (field.velocity[a][shift(grid, c, a, 1)] - field.velocity[a][c]) / grid.spacing[a];
    }
    dmax = std::max(dmax, std::abs(div));
  }
  return dmax * std::min({grid.spacing[0], grid.spacing[1], grid.spacing[2]}) / umax;
}

double superficial_velocity(const StokesField& field) {
  double sum = 0.0;
  for (double u : field.velocity[0]) {
    sum += u;
  }
  return field.velocity[0].empty() ? 0.0 : sum / static_cast<double>(field.velocity[0].size());
}

std::vector<double> cell_velocity_x(const StokesField& field) {
  const auto& u = field.velocity[0];
  std::vector<double> out(u.size());
  const int nx = field.n[0];
  for (std::size_t c = 0; c < u.size(); ++c) {
    const int i = static_cast<int>(c % nx);
    const std::size_t hi = i + 1 < nx ? c + 1 : c + 1 - nx;
    out[c] = 0.5 * (u[c] + u[hi]);
  }
  return out;
}

double intrinsic_velocity(const StokesField& field, const VoxelGrid& grid) {
  const std::vector<double> uc = cell_velocity_x(field);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < uc.size(); ++c) {
    if (grid.fluid[c] != 0) {
      sum += uc[c];
      ++count;
    }
  }
  if (count == 0) {
    throw InvalidArgument("intrinsic_velocity: grid has no fluid cells");
  }
  return sum / static_cast<double>(count);
}

double permeability(const StokesField& field) {
  if (field.gradient == 0.0) {
    throw InvalidArgument("permeability: pressure gradient is zero");
  }
  return field.viscosity * superficial_velocity(field) / field.gradient;
}

double blake_kozeny(double diameter, double porosity, double alpha) {
  if (!(porosity > 0.0 && porosity < 1.0)) {
    throw InvalidArgument("blake_kozeny: porosity must lie in (0, 1)");
  }
  if (!(diameter > 0.0) || !(alpha > 0.0)) {
    throw InvalidArgument("blake_kozeny: diameter and alpha must be positive");
  }
  const double s = 1.0 - porosity;
  return diameter * diameter * porosity * porosity * porosity / (alpha * s * s);
}

double duct_velocity(double side, double viscosity, double gradient, double y, double z, int terms) {
  using std::numbers::pi;
  const double a = 0.5 * side;
  double sum = 0.0;
  for (int k = 0; k < terms; ++k) {
    const int i = 2 * k + 1;
    const double arg = i * pi / (2.0 * a);
    // cosh(arg z) / cosh(arg a) without overflow
    const double ratio = std::exp(arg * (std::abs(z) - a)) * (1.0 + std::exp(-2.0 * arg * std::abs(z))) /
                         (1.0 + std::exp(-2.0 * arg * a));
    sum += (k % 2 == 0 ? 1.0 : -1.0) * (1.0 - ratio) * std::cos(arg * y) / (static_cast<double>(i) * i * i);
  }
  return 16.0 * a * a * gradient / (viscosity * pi * pi * pi) * sum;
}

double duct_mean_velocity(double side, double viscosity, double gradient, int terms) {
  using std::numbers::pi;
  double sum = 0.0;
  for (int k = 0; k < terms; ++k) {
    const double i = 2.0 * k + 1.0;
    sum += std::tanh(i * pi / 2.0) / std::pow(i, 5);
  }
  return side * side * gradient / (12.0 * viscosity) * (1.0 - 192.0 / std::pow(pi, 5) * sum);
}

}  // namespace porous::pore
