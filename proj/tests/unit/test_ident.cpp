#include <doctest.h>

#include <cmath>
#include <random>

#include "porous/error.hpp"
#include "porous/ident/problem.hpp"

using namespace porous;
using namespace porous::ident;

namespace {

const darcy::Rectangle unit{0.0, 0.0, 1.0, 1.0};

std::shared_ptr<const darcy::DarcyDiscretization> make_disc(int n, int px, int py) {
  return std::make_shared<const darcy::DarcyDiscretization>(darcy::StructuredQuadMesh(n, n, unit),
                                                            darcy::grid_partition(unit, px, py),
                                                            darcy::manufactured_source);
}

ReducedObjective make_objective(const std::shared_ptr<const darcy::DarcyDiscretization>& disc,
                                const ObservationOperator& op, const Eigen::VectorXd& qref, double alpha) {
  const Eigen::VectorXd z = generate_synthetic_data(*disc, op, qref);
  return ReducedObjective(disc, op.matrix(disc->mesh()), z, alpha);
}

Eigen::VectorXd random_feasible(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(1.5, 4.0);
  Eigen::VectorXd q(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    q(i) = u(rng);
  }
  return q;
}

/// 0.5 (q - c)^T H (q - c) with a fixed SPD H.
class Quadratic final : public Objective {
 public:
  Quadratic(Eigen::MatrixXd h, Eigen::VectorXd c) : h_(std::move(h)), c_(std::move(c)) {}
  std::size_t size() const override { return static_cast<std::size_t>(c_.size()); }
  double value(const Eigen::VectorXd& q) override { return 0.5 * (q - c_).dot(h_ * (q - c_)); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& q) override { return h_ * (q - c_); }
  Eigen::VectorXd hessian_vector(const Eigen::VectorXd&, const Eigen::VectorXd& dq) override { return h_ * dq; }

 private:
  Eigen::MatrixXd h_;
  Eigen::VectorXd c_;
};

}  // namespace

TEST_CASE("perm_from_params") {
  const auto part = darcy::grid_partition(unit, 4, 4);
  const auto ones = perm_from_params(Eigen::VectorXd::Ones(32), part);
  for (const auto& e : ones.entries()) {
    CHECK(e[0] == 1.0);
    CHECK(e[1] == 1.0);
  }
  Eigen::VectorXd q = Eigen::VectorXd::Ones(32);
  q(0) = 2.0;
  q(1) = 3.0;
  const auto f = perm_from_params(q, part);
  CHECK(f.entries()[0][0] == 2.0);
  CHECK(f.entries()[0][1] == 3.0);
  CHECK(f.entries()[1][0] == 1.0);
  CHECK_THROWS_AS(perm_from_params(Eigen::VectorXd::Ones(30), part), InvalidArgument);
  q(5) = 0.5;
  CHECK_THROWS_AS(perm_from_params(q, part), InvalidArgument);
}

TEST_CASE("observation dimensions") {
  darcy::StructuredQuadMesh m(64, 64, unit);
  CHECK(ObservationOperator::identity().output_size(m) == 3u * 65u * 65u);
  const auto lat = ObservationOperator::lattice(unit);
  CHECK(lat.points().size() == 32u);
  CHECK(lat.output_size(m) == 96u);
  CHECK(lat.matrix(m).rows() == 96);
  // no lattice point sits on an edge of the 4x4 partition
  for (const auto& p : lat.points()) {
    CHECK(std::abs(std::fmod(p.x, 0.25)) > 1e-3);
    CHECK(std::abs(std::fmod(p.y, 0.25)) > 1e-3);
  }
  CHECK_THROWS_AS(ObservationOperator::point_set({}), InvalidArgument);
  CHECK_THROWS_AS(ObservationOperator::point_set({{2.0, 0.5}}).matrix(m), InvalidArgument);
}

TEST_CASE("point observation matches evaluation of the state") {
  auto disc = make_disc(8, 2, 2);
  const Eigen::VectorXd qref = random_feasible(8, 4);
  ReducedObjective obj = make_objective(disc, ObservationOperator::identity(), qref, 0.0);
  const darcy::FemState s = darcy::FemState::from_stacked(obj.state(qref));
  const auto op = ObservationOperator::point_set({{0.3, 0.7}, {0.61, 0.05}});
  const Eigen::VectorXd y = op.matrix(disc->mesh()) * obj.state(qref);
  const auto e0 = darcy::evaluate(disc->mesh(), s, 0.3, 0.7);
  CHECK(y(0) == doctest::Approx(e0.ux));
  CHECK(y(1) == doctest::Approx(e0.uy));
  CHECK(y(2) == doctest::Approx(e0.p));
  CHECK(y(5) == doctest::Approx(darcy::evaluate(disc->mesh(), s, 0.61, 0.05).p));
}

TEST_CASE("reduced cost") {
  auto disc = make_disc(16, 2, 1);
  const Eigen::VectorXd qref = random_feasible(4, 1);
  ReducedObjective obj = make_objective(disc, ObservationOperator::identity(), qref, 0.0);
  CHECK(obj.value(qref) < 1e-20);
  Eigen::VectorXd qp = qref;
  qp(1) *= 1.01;
  CHECK(obj.value(qp) > obj.value(qref));
  ReducedObjective reg = make_objective(disc, ObservationOperator::identity(), qref, 0.3);
  CHECK(reg.value(qref) == doctest::Approx(0.15 * qref.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("adjoint gradient matches central differences") {
  auto disc = make_disc(16, 2, 1);
  const Eigen::VectorXd qref = random_feasible(4, 2);
  ReducedObjective obj = make_objective(disc, ObservationOperator::lattice(unit), qref, 0.0);
  const Eigen::VectorXd q = random_feasible(4, 3);
  const Eigen::VectorXd g = obj.gradient(q);
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    Eigen::VectorXd qp = q;
    Eigen::VectorXd qm = q;
    qp(k) += h;
    qm(k) -= h;
    const double fd = (obj.value(qp) - obj.value(qm)) / (2 * h);
    CHECK(std::abs(fd - g(k)) < 1e-6 * std::abs(g(k)));
  }
}

TEST_CASE("regularization adds alpha q to the gradient") {
  auto disc = make_disc(8, 2, 2);
  const Eigen::VectorXd qref = random_feasible(8, 5);
  const Eigen::VectorXd q = random_feasible(8, 6);
  ReducedObjective a = make_objective(disc, ObservationOperator::identity(), qref, 0.0);
  ReducedObjective b = make_objective(disc, ObservationOperator::identity(), qref, 0.7);
  CHECK((b.gradient(q) - a.gradient(q) - 0.7 * q).norm() < 1e-14 * q.norm());
}

TEST_CASE("Hessian-vector products") {
  auto disc = make_disc(16, 2, 2);
  const Eigen::VectorXd qref = random_feasible(8, 7);
  ReducedObjective obj = make_objective(disc, ObservationOperator::identity(), qref, 0.01);
  const Eigen::VectorXd q = random_feasible(8, 8);
  const Eigen::VectorXd d1 = Eigen::VectorXd::Random(8);
  const Eigen::VectorXd d2 = Eigen::VectorXd::Random(8);
  const Eigen::VectorXd h1 = obj.hessian_vector(q, d1);
  const Eigen::VectorXd h2 = obj.hessian_vector(q, d2);
  CHECK(std::abs(h1.dot(d2) - h2.dot(d1)) < 1e-8 * std::abs(h1.dot(d2)));
  const double h = 1e-5;
  const Eigen::VectorXd fd = (obj.gradient(q + h * d1) - obj.gradient(q - h * d1)) / (2 * h);
  CHECK((fd - h1).norm() < 1e-5 * h1.norm());
  CHECK(obj.hessian_vector(q, Eigen::VectorXd::Zero(8)).norm() == 0.0);
}

TEST_CASE("cost is invariant under relabeling subdomains") {
  const darcy::StructuredQuadMesh mesh(16, 16, unit);
  darcy::Partition part = darcy::grid_partition(unit, 2, 2);
  const Eigen::VectorXd q = random_feasible(8, 9);
  auto d1 = std::make_shared<const darcy::DarcyDiscretization>(mesh, part, darcy::manufactured_source);
  const Eigen::VectorXd qref = random_feasible(8, 10);
  const auto op = ObservationOperator::lattice(unit);
  const Eigen::VectorXd z = generate_synthetic_data(*d1, op, qref);
  ReducedObjective o1(d1, op.matrix(mesh), z, 0.1);
  const std::vector<int> perm = {2, 0, 3, 1};
  darcy::Partition p2(4);
  Eigen::VectorXd q2(8);
  for (int i = 0; i < 4; ++i) {
    p2[i] = part[perm[i]];
    q2(2 * i) = q(2 * perm[i]);
    q2(2 * i + 1) = q(2 * perm[i] + 1);
  }
  auto d2 = std::make_shared<const darcy::DarcyDiscretization>(mesh, p2, darcy::manufactured_source);
  ReducedObjective o2(d2, op.matrix(mesh), z, 0.1);
  CHECK(o1.value(q) == doctest::Approx(o2.value(q2)).epsilon(1e-10));
}

TEST_CASE("Newton-CG on a quadratic converges in one step") {
  Eigen::MatrixXd b = Eigen::MatrixXd::Random(6, 6);
  const Eigen::MatrixXd h = 1e3 * Eigen::MatrixXd::Identity(6, 6) + 1e-9 * b * b.transpose();
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(6, 2.0, 5.0);
  Quadratic quad(h, c);
  const ConstraintSet box = ConstraintSet::standard(6);
  const NewtonStepResult r = newton_cg_step(quad, Eigen::VectorXd::Constant(6, 3.0), std::vector<bool>(6, false), box);
  CHECK(r.accepted);
  CHECK(r.step_length == 1.0);
  CHECK(quad.gradient(r.q).norm() < 1e-8);
}

TEST_CASE("Newton-CG with every coordinate active is a no-op") {
  Quadratic quad(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Constant(3, 5.0));
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(3, 2.0);
  const NewtonStepResult r = newton_cg_step(quad, q, std::vector<bool>(3, true), ConstraintSet::standard(3));
  CHECK(r.q == q);
  CHECK(!r.accepted);
  CHECK(r.cg_iterations == 0);
}

TEST_CASE("Newton-CG takes a steepest-descent step on negative curvature") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
  h(1, 1) = -1.0;
  Quadratic quad(h, Eigen::Vector2d(3.0, 3.0));
  ConstraintSet box{Eigen::Vector2d(-10.0, -10.0), Eigen::Vector2d(10.0, 10.0)};
  const NewtonStepResult r = newton_cg_step(quad, Eigen::Vector2d(2.0, 2.5), {false, false}, box);
  CHECK(r.negative_curvature);
  CHECK(r.accepted);
  CHECK(r.value_after < r.value_before);
}

TEST_CASE("PDAS with distant bounds matches unconstrained Newton") {
  Eigen::MatrixXd b = Eigen::MatrixXd::Random(5, 5);
  const Eigen::MatrixXd h = b * b.transpose() + Eigen::MatrixXd::Identity(5, 5);
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(5, 1.0, 2.0);
  Quadratic quad(h, c);
  ConstraintSet box{Eigen::VectorXd::Constant(5, -1e6), Eigen::VectorXd::Constant(5, 1e6)};
  const PdasResult r = pdas_solve(quad, Eigen::VectorXd::Zero(5), box);
  CHECK((r.q - c).norm() < 1e-9);
  CHECK(r.history.back().active_lower.empty());
}

TEST_CASE("PDAS identifies active bounds and projects infeasible starts") {
  const Eigen::MatrixXd h = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
  Quadratic quad(h, Eigen::Vector3d(0.0, 2.0, 7.0));
  ConstraintSet box{Eigen::Vector3d(1.0, 1.0, 1.0), Eigen::Vector3d(5.0, 5.0, 5.0)};
  const PdasResult r = pdas_solve(quad, Eigen::Vector3d(-3.0, 9.0, 0.0), box);
  CHECK(r.q(0) == 1.0);
  CHECK(r.q(1) == doctest::Approx(2.0));
  CHECK(r.q(2) == 5.0);
  CHECK(r.history.back().active_lower == std::vector<int>{0});
  CHECK(r.history.back().active_upper == std::vector<int>{2});
}

TEST_CASE("PDAS reports the outer iteration cap") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
  Quadratic quad(h, Eigen::Vector2d(3.0, 3.0));
  PdasOptions opt;
  opt.max_outer_iterations = 1;
  try {
    pdas_solve(quad, Eigen::Vector2d(1.0, 1.0), ConstraintSet::standard(2), opt);
    FAIL("expected PdasError");
  } catch (const PdasError& e) {
    CHECK(e.last().q.size() == 2);
    CHECK(e.residual_history().size() == 1u);
  }
}

TEST_CASE("noiseless identity data are recovered") {
  auto disc = make_disc(16, 2, 2);
  Eigen::VectorXd qref = default_reference_parameters(8);
  qref(2) = 1.0;
  qref(5) = 1.0;
  ReducedObjective obj = make_objective(disc, ObservationOperator::identity(), qref, 0.0);
  const ConstraintSet box = ConstraintSet::standard(8);
  const PdasResult r = pdas_solve(obj, Eigen::VectorXd::Ones(8), box);
  const RelativeErrors e = relative_parameter_errors(r.q, qref);
  CHECK(e.a < 1e-3);
  CHECK(e.b < 1e-3);
  CHECK(r.q(2) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.q(5) == doctest::Approx(1.0).epsilon(1e-6));
  for (const auto& it : r.history) {
    for (std::size_t k = 1; k < it.inner_values.size(); ++k) {
      CHECK(it.inner_values[k] <= it.inner_values[k - 1]);
    }
  }
  CHECK(box.is_feasible(r.q));
}

TEST_CASE("Newton iterations converge superlinearly near the solution") {
  auto disc = make_disc(16, 2, 1);
  const Eigen::VectorXd qref = random_feasible(4, 11);
  ReducedObjective obj = make_objective(disc, ObservationOperator::identity(), qref, 0.0);
  Eigen::VectorXd q = qref * 1.2;
  const ConstraintSet box = ConstraintSet::standard(4);
  std::vector<double> gn;
  for (int k = 0; k < 6; ++k) {
    gn.push_back(obj.gradient(q).norm());
    if (gn.back() < 1e-12) {
      break;
    }
    q = newton_cg_step(obj, q, std::vector<bool>(4, false), box).q;
  }
  REQUIRE(gn.size() >= 4);
  const std::size_t m = gn.size();
  CHECK(gn[m - 1] / gn[m - 2] < gn[m - 2] / gn[m - 3]);
  CHECK(gn[m - 1] / gn[m - 2] < 0.1);
}

TEST_CASE("synthetic data and relative errors") {
  auto disc = make_disc(8, 2, 2);
  const Eigen::VectorXd qref = random_feasible(8, 12);
  const auto op = ObservationOperator::lattice(unit);
  const Eigen::VectorXd z0 = generate_synthetic_data(*disc, op, qref);
  ReducedObjective obj(disc, op.matrix(disc->mesh()), z0, 0.0);
  CHECK(obj.observe(qref) == z0);
  const Eigen::VectorXd z1 = generate_synthetic_data(*disc, op, qref, 0.01, 5);
  const Eigen::VectorXd z2 = generate_synthetic_data(*disc, op, qref, 0.01, 5);
  CHECK(z1 == z2);
  CHECK((z1 - z0).norm() > 0.0);
  const RelativeErrors e = relative_parameter_errors(qref, qref);
  CHECK(e.a == 0.0);
  CHECK(e.b == 0.0);
  CHECK_THROWS_AS(relative_parameter_errors(qref, Eigen::VectorXd::Zero(8)), InvalidArgument);
}

TEST_CASE("default reference parameters") {
  const Eigen::VectorXd a = default_reference_parameters(32);
  const Eigen::VectorXd b = default_reference_parameters(32);
  CHECK(a == b);
  CHECK(a.minCoeff() >= 1.0);
  CHECK(a.maxCoeff() <= 10.0);
  CHECK(unit_uniform(0) == 0.0);
  CHECK(unit_uniform(~std::uint64_t{0}) < 1.0);
}
