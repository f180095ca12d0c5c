#include "porous/darcy/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "porous/error.hpp"
#include "porous/quadrature.hpp"

namespace porous::darcy {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

/// Q1 shape functions on a cell in local coordinates (xi, eta) in [0, 1]^2.
struct CellBasis {
  std::array<double, 4> value;
  std::array<double, 4> dx;
  std::array<double, 4> dy;
};

CellBasis cell_basis(double xi, double eta, double hx, double hy) {
  CellBasis b;
  b.value = {(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta};
  b.dx = {-(1 - eta) / hx, (1 - eta) / hx, -eta / hx, eta / hx};
  b.dy = {-(1 - xi) / hy, -xi / hy, (1 - xi) / hy, xi / hy};
  return b;
}

void check_parameters(std::span<const double> q, std::size_t expected) {
  if (q.size() != expected) {
    throw InvalidArgument("Darcy parameters: expected " + std::to_string(expected) + " entries, got " +
                          std::to_string(q.size()));
  }
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (!(q[k] > 0.0) || !std::isfinite(q[k])) {
      throw InvalidArgument("Darcy parameters: entry " + std::to_string(k) + " must be positive, got " +
                            std::to_string(q[k]));
    }
  }
}

}  // namespace

Eigen::VectorXd FemState::stacked() const {
  Eigen::VectorXd x(velocity.size() + pressure.size());
  std::copy(velocity.begin(), velocity.end(), x.data());
  std::copy(pressure.begin(), pressure.end(), x.data() + velocity.size());
  return x;
}

FemState FemState::from_stacked(const Eigen::VectorXd& x) {
  if (x.size() % 3 != 0) {
    throw InvalidArgument("FemState: stacked vector length must be a multiple of 3");
  }
  const std::size_t n = static_cast<std::size_t>(x.size()) / 3;
  FemState s;
  s.velocity.assign(x.data(), x.data() + 2 * n);
  s.pressure.assign(x.data() + 2 * n, x.data() + 3 * n);
  return s;
}

std::vector<double> fluctuation(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) {
    throw InvalidArgument("fluctuation: empty patch");
  }
  if (values.size() != weights.size()) {
    throw InvalidArgument("fluctuation: values and weights differ in length");
  }
  double mass = 0.0;
  double integral = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    mass += weights[i];
    integral += weights[i] * values[i];
  }
  if (!(mass > 0.0)) {
    throw InvalidArgument("fluctuation: patch has zero measure");
  }
  const double mean = integral / mass;
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = values[i] - mean;
  }
  return out;
}

std::vector<QuadraturePoint> patch_quadrature(const StructuredQuadMesh& mesh, int patch) {
  if (patch < 0 || patch >= mesh.num_patches()) {
    throw InvalidArgument("patch_quadrature: patch index out of range");
  }
  const GaussRule g = gauss_legendre_unit(2);
  std::vector<QuadraturePoint> out;
  out.reserve(16);
  for (const int c : mesh.patch_cells(patch)) {
    const Point2 o = mesh.cell_origin(c);
    for (std::size_t qy = 0; qy < g.size(); ++qy) {
      for (std::size_t qx = 0; qx < g.size(); ++qx) {
        out.push_back({{o.x + g.points[qx] * mesh.hx(), o.y + g.points[qy] * mesh.hy()},
                       g.weights[qx] * g.weights[qy] * mesh.hx() * mesh.hy()});
      }
    }
  }
  return out;
}

DarcyDiscretization::DarcyDiscretization(StructuredQuadMesh mesh, Partition partition, const SourceField& source,
                                         StabilizationWeights weights)
    : mesh_(std::move(mesh)), partition_(std::move(partition)), weights_(weights) {
  if (!source) {
    throw InvalidArgument("DarcyDiscretization: empty source field");
  }
  cell_subdomain_ = map_cells_to_partition(mesh_, partition_);
  const DofLayout dofs = layout();
  const int n = dofs.size();
  const int nv = mesh_.num_vertices();

  constrained_.assign(n, 0);
  for (int v = 0; v < nv; ++v) {
    if (mesh_.on_vertical_boundary(v)) {
      constrained_[dofs.ux(v)] = 1;
    }
    if (mesh_.on_horizontal_boundary(v)) {
      constrained_[dofs.uy(v)] = 1;
    }
  }
  constrained_[dofs.p(0)] = 1;

  const GaussRule g = gauss_legendre_unit(2);
  const double hx = mesh_.hx();
  const double hy = mesh_.hy();

  Triplets coupling;
  std::vector<Triplets> mass(num_parameters());
  Eigen::VectorXd load = Eigen::VectorXd::Zero(n);
  basis_integrals_.assign(nv, 0.0);
  double source_abs = 0.0;

  for (int c = 0; c < mesh_.num_cells(); ++c) {
    const auto verts = mesh_.cell_vertices(c);
    const Point2 o = mesh_.cell_origin(c);
    const int sub = cell_subdomain_[c];
    for (std::size_t qy = 0; qy < g.size(); ++qy) {
      for (std::size_t qx = 0; qx < g.size(); ++qx) {
        const CellBasis b = cell_basis(g.points[qx], g.points[qy], hx, hy);
        const double w = g.weights[qx] * g.weights[qy] * hx * hy;
        const double fx = source(o.x + g.points[qx] * hx, o.y + g.points[qy] * hy);
        source_abs += w * std::abs(fx);
        for (int a = 0; a < 4; ++a) {
          const int va = verts[a];
          load(dofs.p(va)) += w * fx * b.value[a];
          basis_integrals_[va] += w * b.value[a];
          for (int bb = 0; bb < 4; ++bb) {
            const int vb = verts[bb];
            const double m = w * b.value[a] * b.value[bb];
            mass[2 * sub].emplace_back(dofs.ux(va), dofs.ux(vb), m);
            mass[2 * sub + 1].emplace_back(dofs.uy(va), dofs.uy(vb), m);
            // -(p, div phi_v)
            coupling.emplace_back(dofs.ux(va), dofs.p(vb), -w * b.value[bb] * b.dx[a]);
            coupling.emplace_back(dofs.uy(va), dofs.p(vb), -w * b.value[bb] * b.dy[a]);
            // (phi_p, div u)
            coupling.emplace_back(dofs.p(va), dofs.ux(vb), w * b.value[a] * b.dx[bb]);
            coupling.emplace_back(dofs.p(va), dofs.uy(vb), w * b.value[a] * b.dy[bb]);
          }
        }
      }
    }
  }

  // Local projection stabilization on each 2x2 patch. For the fluctuation of a
  // gradient, (kappa g_a, kappa g_b)_M = (g_a, g_b)_M - (int_M g_a).(int_M g_b) / |M|.
  Triplets stab_u;
  Triplets stab_p;
  for (int patch = 0; patch < mesh_.num_patches(); ++patch) {
    const auto cells = mesh_.patch_cells(patch);
    const int v0 = mesh_.cell_vertices(cells[0])[0];
    const auto patch_vertex = [&](int a) { return v0 + (a % 3) + (mesh_.nx() + 1) * (a / 3); };
    std::array<double, 9> gx{};
    std::array<double, 9> gy{};
    Eigen::Matrix<double, 9, 9> gram = Eigen::Matrix<double, 9, 9>::Zero();
    double area = 0.0;
    for (int k = 0; k < 4; ++k) {
      const int ci = k % 2;
      const int cj = k / 2;
      // local vertex a of sub-cell k maps to patch vertex (ci + a%2) + 3 (cj + a/2)
      std::array<int, 4> local{};
      for (int a = 0; a < 4; ++a) {
        local[a] = (ci + a % 2) + 3 * (cj + a / 2);
      }
      for (std::size_t qy = 0; qy < g.size(); ++qy) {
        for (std::size_t qx = 0; qx < g.size(); ++qx) {
          const CellBasis b = cell_basis(g.points[qx], g.points[qy], hx, hy);
          const double w = g.weights[qx] * g.weights[qy] * hx * hy;
          area += w;
          for (int a = 0; a < 4; ++a) {
            gx[local[a]] += w * b.dx[a];
            gy[local[a]] += w * b.dy[a];
            for (int bb = 0; bb < 4; ++bb) {
              gram(local[a], local[bb]) += w * (b.dx[a] * b.dx[bb] + b.dy[a] * b.dy[bb]);
            }
          }
        }
      }
    }
    const double h2 = mesh_.patch_diameter(patch) * mesh_.patch_diameter(patch);
    for (int a = 0; a < 9; ++a) {
      for (int bb = 0; bb < 9; ++bb) {
        const double s = gram(a, bb) - (gx[a] * gx[bb] + gy[a] * gy[bb]) / area;
        const int va = patch_vertex(a);
        const int vb = patch_vertex(bb);
        stab_u.emplace_back(dofs.ux(va), dofs.ux(vb), weights_.velocity * h2 * s);
        stab_u.emplace_back(dofs.uy(va), dofs.uy(vb), weights_.velocity * h2 * s);
        stab_p.emplace_back(dofs.p(va), dofs.p(vb), weights_.pressure * s);
      }
    }
  }
  stab_u_.resize(n, n);
  stab_u_.setFromTriplets(stab_u.begin(), stab_u.end());
  stab_p_.resize(n, n);
  stab_p_.setFromTriplets(stab_p.begin(), stab_p.end());

  // q-independent part with constrained rows/columns replaced by identity rows.
  // Parameter positions enter the pattern with explicit zeros.
  Triplets base;
  base.reserve(coupling.size() + stab_u.size() + stab_p.size());
  const auto keep = [&](const Eigen::Triplet<double>& t) {
    return constrained_[t.row()] == 0 && constrained_[t.col()] == 0;
  };
  for (const Triplets* list : {&coupling, &stab_u, &stab_p}) {
    for (const auto& t : *list) {
      if (keep(t)) {
        base.push_back(t);
      }
    }
  }
  for (const auto& list : mass) {
    for (const auto& t : list) {
      if (keep(t)) {
        base.emplace_back(t.row(), t.col(), 0.0);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (constrained_[i] != 0) {
      base.emplace_back(i, i, 1.0);
    }
  }
  base_.resize(n, n);
  base_.setFromTriplets(base.begin(), base.end());
  base_.makeCompressed();

  parameter_entries_.resize(num_parameters());
  for (std::size_t k = 0; k < num_parameters(); ++k) {
    Eigen::SparseMatrix<double> mk(n, n);
    mk.setFromTriplets(mass[k].begin(), mass[k].end());
    for (int col = 0; col < mk.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(mk, col); it; ++it) {
        const int row = static_cast<int>(it.row());
        if (constrained_[row] != 0 || constrained_[col] != 0) {
          continue;
        }
        const int* begin = base_.innerIndexPtr() + base_.outerIndexPtr()[col];
        const int* end = base_.innerIndexPtr() + base_.outerIndexPtr()[col + 1];
        const int* pos = std::lower_bound(begin, end, row);
        parameter_entries_[k].push_back(
            {row, col, static_cast<int>(pos - base_.innerIndexPtr()), it.value()});
      }
    }
  }

  // Remove the quadrature-level mean of f so the pinned pressure row is implied.
  const double area = mesh_.domain().area();
  const double total = load.segment(dofs.p(0), nv).sum();
  compatibility_defect_ = source_abs > 0.0 ? std::abs(total) / source_abs : 0.0;
  for (int v = 0; v < nv; ++v) {
    load(dofs.p(v)) -= basis_integrals_[v] * total / area;
  }
  for (int i = 0; i < n; ++i) {
    if (constrained_[i] != 0) {
      load(i) = 0.0;
    }
  }
  rhs_ = std::move(load);
}

Eigen::SparseMatrix<double> DarcyDiscretization::matrix(std::span<const double> q) const {
  check_parameters(q, num_parameters());
  Eigen::SparseMatrix<double> a = base_;
  double* values = a.valuePtr();
  for (std::size_t k = 0; k < parameter_entries_.size(); ++k) {
    for (const auto& e : parameter_entries_[k]) {
      values[e.slot] += q[k] * e.value;
    }
  }
  return a;
}

Eigen::VectorXd DarcyDiscretization::apply_parameter_derivative(std::span<const double> dq,
                                                                const Eigen::VectorXd& x) const {
  if (dq.size() != num_parameters()) {
    throw InvalidArgument("apply_parameter_derivative: wrong direction length");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (std::size_t k = 0; k < parameter_entries_.size(); ++k) {
    if (dq[k] == 0.0) {
      continue;
    }
    for (const auto& e : parameter_entries_[k]) {
      out(e.row) += dq[k] * e.value * x(e.col);
    }
  }
  return out;
}

Eigen::VectorXd DarcyDiscretization::parameter_sensitivities(const Eigen::VectorXd& y,
                                                             const Eigen::VectorXd& x) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_parameters()));
  for (std::size_t k = 0; k < parameter_entries_.size(); ++k) {
    double acc = 0.0;
    for (const auto& e : parameter_entries_[k]) {
      acc += y(e.row) * e.value * x(e.col);
    }
    s(static_cast<Eigen::Index>(k)) = acc;
  }
  return s;
}

Eigen::VectorXd DarcyDiscretization::gauge(const Eigen::VectorXd& raw) const {
  const DofLayout dofs = layout();
  const int nv = dofs.num_vertices;
  double mean = 0.0;
  for (int v = 0; v < nv; ++v) {
    mean += basis_integrals_[v] * raw(dofs.p(v));
  }
  mean /= mesh_.domain().area();
  Eigen::VectorXd out = raw;
  out.segment(dofs.p(0), nv).array() -= mean;
  return out;
}

Eigen::VectorXd DarcyDiscretization::gauge_transpose(const Eigen::VectorXd& y) const {
  const DofLayout dofs = layout();
  const int nv = dofs.num_vertices;
  const double sum = y.segment(dofs.p(0), nv).sum() / mesh_.domain().area();
  Eigen::VectorXd out = y;
  for (int v = 0; v < nv; ++v) {
    out(dofs.p(v)) -= basis_integrals_[v] * sum;
  }
  return out;
}

DarcySystem assemble_darcy(const StructuredQuadMesh& mesh, const PermeabilityField& perm, const SourceField& f,
                           StabilizationWeights weights) {
  auto disc = std::make_shared<const DarcyDiscretization>(mesh, perm.partition(), f, weights);
  DarcySystem system;
  system.parameters = perm.flattened();
  system.matrix = disc->matrix(system.parameters);
  system.rhs = disc->rhs();
  system.discretization = std::move(disc);
  return system;
}

FemState solve_state(const DarcySystem& system, const LinearSolverOptions& options) {
  if (!system.discretization) {
    throw InvalidArgument("solve_state: system has no discretization attached");
  }
  const DarcyDiscretization& disc = *system.discretization;
  if (disc.compatibility_defect() > 1e-8) {
    throw InvalidArgument("solve_state: source violates the compatibility condition (relative |int f| = " +
                          std::to_string(disc.compatibility_defect()) + ")");
  }
  LinearSolver solver(options);
  solver.factorize(system.matrix);
  const Eigen::VectorXd raw = solver.solve(system.rhs);
  return FemState::from_stacked(disc.gauge(raw));
}

std::array<std::pair<int, double>, 4> interpolation_weights(const StructuredQuadMesh& mesh, double x, double y) {
  const int c = mesh.locate_cell(x, y);
  const Point2 o = mesh.cell_origin(c);
  const double xi = std::clamp((x - o.x) / mesh.hx(), 0.0, 1.0);
  const double eta = std::clamp((y - o.y) / mesh.hy(), 0.0, 1.0);
  const auto verts = mesh.cell_vertices(c);
  const CellBasis b = cell_basis(xi, eta, mesh.hx(), mesh.hy());
  return {{{verts[0], b.value[0]}, {verts[1], b.value[1]}, {verts[2], b.value[2]}, {verts[3], b.value[3]}}};
}

FlowSample evaluate(const StructuredQuadMesh& mesh, const FemState& state, double x, double y) {
  if (state.num_vertices() != static_cast<std::size_t>(mesh.num_vertices())) {
    throw InvalidArgument("evaluate: state does not match mesh");
  }
  FlowSample s;
  for (const auto& [v, w] : interpolation_weights(mesh, x, y)) {
    s.ux += w * state.ux(v);
    s.uy += w * state.uy(v);
    s.p += w * state.pressure[v];
  }
  return s;
}

FlowSample manufactured_solution(double x, double y) {
  using std::numbers::pi;
  return {std::sin(pi * x) * std::cos(pi * y) / pi, std::cos(pi * x) * std::sin(pi * y) / pi,
          std::cos(pi * x) * std::cos(pi * y) / (pi * pi)};
}

double manufactured_source(double x, double y) {
  using std::numbers::pi;
  return 2.0 * std::cos(pi * x) * std::cos(pi * y);
}

L2Errors l2_errors(const StructuredQuadMesh& mesh, const FemState& state, const ExactSolution& exact) {
  if (state.num_vertices() != static_cast<std::size_t>(mesh.num_vertices())) {
    throw InvalidArgument("l2_errors: state does not match mesh");
  }
  const GaussRule g = gauss_legendre_unit(3);
  double eu = 0.0;
  double ep = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto verts = mesh.cell_vertices(c);
    const Point2 o = mesh.cell_origin(c);
    for (std::size_t qy = 0; qy < g.size(); ++qy) {
      for (std::size_t qx = 0; qx < g.size(); ++qx) {
        const CellBasis b = cell_basis(g.points[qx], g.points[qy], mesh.hx(), mesh.hy());
        const double w = g.weights[qx] * g.weights[qy] * mesh.hx() * mesh.hy();
        FlowSample h;
        for (int a = 0; a < 4; ++a) {
          h.ux += b.value[a] * state.ux(verts[a]);
          h.uy += b.value[a] * state.uy(verts[a]);
          h.p += b.value[a] * state.pressure[verts[a]];
        }
        const FlowSample e = exact(o.x + g.points[qx] * mesh.hx(), o.y + g.points[qy] * mesh.hy());
        eu += w * ((h.ux - e.ux) * (h.ux - e.ux) + (h.uy - e.uy) * (h.uy - e.uy));
        ep += w * (h.p - e.p) * (h.p - e.p);
      }
    }
  }
  return {std::sqrt(eu), std::sqrt(ep)};
}

}  // namespace porous::darcy
