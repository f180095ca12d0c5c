#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "porous/error.hpp"
#include "porous/pfem/basis.hpp"
#include "porous/pfem/convection_diffusion.hpp"

using namespace porous;
using namespace porous::pfem;

namespace {

ConvDiff1DProblem demo_problem() {
  ConvDiff1DProblem p;
  p.velocity = 2.0;
  p.diffusivity = 0.02;
  p.left_value = 0.0;
  p.right_value = 1.0;
  p.elements = 10;
  return p;
}

double max_nodal_error(const DiscreteSolution& s, const ConvDiff1DProblem& p) {
  double err = 0.0;
  for (int j = 0; j <= s.elements(); ++j) {
    err = std::max(err, std::abs(s.nodal()[j] - analytic_solution(p.velocity, p.diffusivity, s.node(j))));
  }
  return err;
}

}  // namespace

TEST_CASE("internal modes vanish at the element ends") {
  for (int p = 2; p <= 9; ++p) {
    HierarchicBasis b(p);
    for (int k = 2; k <= p; ++k) {
      CHECK(std::abs(b.value(k, -1.0)) < 1e-14);
      CHECK(std::abs(b.value(k, 1.0)) < 1e-14);
    }
  }
}

TEST_CASE("basis is hierarchic") {
  HierarchicBasis lo(3);
  HierarchicBasis hi(6);
  for (double xi : {-0.9, -0.3, 0.2, 0.77}) {
    for (int k = 0; k <= 3; ++k) {
      CHECK(lo.value(k, xi) == doctest::Approx(hi.value(k, xi)).epsilon(1e-15));
      CHECK(lo.derivative(k, xi) == doctest::Approx(hi.derivative(k, xi)).epsilon(1e-15));
    }
  }
}

TEST_CASE("internal-mode derivatives are L2 orthogonal") {
  HierarchicBasis b(6);
  const int n = 12;
  // midpoint rule is too crude; use the derivative identity with Gauss points
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(5, 5);
  const double pts[] = {-0.9815606342467192, -0.9041172563704749, -0.7699026741943047, -0.5873179542866175,
                        -0.3678314989981802, -0.1252334085114689, 0.1252334085114689,  0.3678314989981802,
                        0.5873179542866175,  0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
  const double wts[] = {0.0471753363865118, 0.1069393259953184, 0.1600783285433462, 0.2031674267230659,
                        0.2334925365383548, 0.2491470458134028, 0.2491470458134028, 0.2334925365383548,
                        0.2031674267230659, 0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
  for (int q = 0; q < n; ++q) {
    for (int i = 2; i <= 6; ++i) {
      for (int j = 2; j <= 6; ++j) {
        g(i - 2, j - 2) += wts[q] * b.derivative(i, pts[q]) * b.derivative(j, pts[q]);
      }
    }
  }
  CHECK((g - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bar_gamma_exact") {
  CHECK(bar_gamma_exact(0.0, 1.0) == 0.0);
  CHECK(std::abs(bar_gamma_exact(1e-9, 1.0)) < 1e-15);
  CHECK(bar_gamma_exact(1.0, 1.0) == doctest::Approx(0.31303528549933).epsilon(1e-12));
  CHECK(std::abs(bar_gamma_exact(50.0, 1.0) - 49.0) < 1e-10);
  // continuity across the series switch
  CHECK(bar_gamma_exact(0.1 - 1e-12, 2.0) == doctest::Approx(bar_gamma_exact(0.1 + 1e-12, 2.0)).epsilon(1e-9));
}

TEST_CASE("closed-form numerical diffusivities") {
  CHECK(bar_gamma_p(2, 3.0, 1.0) == doctest::Approx(3.0));
  CHECK(bar_gamma_p(3, 1e6, 1.0) == doctest::Approx(5.0).epsilon(1e-9));
  for (int p = 2; p <= 5; ++p) {
    CHECK(bar_gamma_p(p, 0.0, 1.0) == 0.0);
  }
  CHECK_THROWS_AS(bar_gamma_p(6, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("condensation reproduces the closed forms") {
  for (int p = 2; p <= 5; ++p) {
    for (double pe : {0.5, 1.0, 5.0, 20.0}) {
      for (double gamma : {1.0, 0.02}) {
        const double num = bar_gamma_p_numeric(p, pe, gamma);
        const double ref = bar_gamma_p(p, pe, gamma);
        CHECK(std::abs(num - ref) <= 1e-10 * std::abs(ref));
      }
    }
  }
  CHECK(bar_gamma_p_numeric(1, 3.0, 1.0) == 0.0);
}

TEST_CASE("condensed stencil is independent of internal-mode scaling") {
  const int p = 5;
  const double u = 3.0;
  const double gamma = 0.4;
  const double h = 0.25;
  Eigen::MatrixXd k = element_matrix(p, u, gamma, h);
  Eigen::VectorXd s(p + 1);
  s << 1.0, 1.0, 0.3, 7.0, 0.02, 2.5;
  const Eigen::MatrixXd ks = s.asDiagonal() * k * s.asDiagonal();
  const auto schur = [&](const Eigen::MatrixXd& m) {
    const int ni = p - 1;
    return Eigen::MatrixXd(m.topLeftCorner(2, 2) -
                           m.topRightCorner(2, ni) * m.bottomRightCorner(ni, ni).lu().solve(m.bottomLeftCorner(ni, 2)));
  };
  CHECK((schur(k) - schur(ks)).cwiseAbs().maxCoeff() < 1e-12);
  const CondensedTridiagonal c = condense(p, u, gamma, h);
  CHECK(c.bar_gamma == doctest::Approx(bar_gamma_p(5, u * h / (2 * gamma), gamma)).epsilon(1e-10));
  CHECK(c.stencil[1] == 2.0);
  CHECK(c.stencil[0] == doctest::Approx(-1.0 - c.alpha));
  CHECK(c.stencil[2] == doctest::Approx(-1.0 + c.alpha));
}

TEST_CASE("alpha_p") {
  CHECK(alpha_p(1, 5.0) == doctest::Approx(5.0));
  CHECK(alpha_p(2, std::sqrt(3.0)) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
  CHECK(std::abs(alpha_p(3, 2.322185) - 1.0) < 1e-5);
  CHECK(std::abs(alpha_p(7, 4.971786) - 1.0) < 1e-5);
  CHECK(alpha_p(4, 0.0) == 0.0);
}

TEST_CASE("parity law") {
  for (int p : {2, 4, 6}) {
    for (int i = 1; i <= 1000; ++i) {
      REQUIRE(alpha_p(p, 0.1 * i) < 1.0);
    }
  }
  for (int p : {3, 5, 7}) {
    int crossings = 0;
    bool above = alpha_p(p, 0.05) >= 1.0;
    for (int i = 2; i <= 400; ++i) {
      const bool now = alpha_p(p, 0.05 * i) >= 1.0;
      crossings += now != above ? 1 : 0;
      above = now;
    }
    CHECK(crossings == 1);
    CHECK(above);
  }
}

TEST_CASE("Peclet thresholds") {
  CHECK(max_stable_pe(1) == 1.0);
  CHECK(std::abs(max_stable_pe(3) - 2.322185) < 1e-5);
  CHECK(std::abs(max_stable_pe(5) - 3.646738) < 1e-5);
  CHECK(std::abs(max_stable_pe(9) - 6.297019) < 1e-5);
  CHECK_THROWS_AS(max_stable_pe(4), InvalidArgument);
  CHECK(min_degree_for_pe(0.5) == 1);
  CHECK(min_degree_for_pe(3.0) == 5);
  CHECK(min_degree_for_pe(7.0) == 11);
}

TEST_CASE("truncation error") {
  CHECK(truncation_error(3, 0.0, 1.0) == 0.0);
  for (int p = 2; p <= 4; ++p) {
    CHECK(std::abs(truncation_error(p + 1, 2.0, 1.0)) < std::abs(truncation_error(p, 2.0, 1.0)));
  }
  for (int p : {3, 5}) {
    CHECK(truncation_error(p, 30.0, 1.0) > 0.0);
  }
  for (int p : {2, 4}) {
    CHECK(truncation_error(p, 30.0, 1.0) < 0.0);
  }
}

TEST_CASE("analytic solution") {
  CHECK(analytic_solution(2.0, 0.02, 0.0) == 0.0);
  CHECK(analytic_solution(2.0, 0.02, 1.0) == doctest::Approx(1.0));
  CHECK(analytic_solution(100.0, 1.0, 0.5) == doctest::Approx(1.9287498479639178e-22).epsilon(1e-10));
  CHECK(analytic_solution(0.0, 1.0, 0.3) == doctest::Approx(0.3));
  CHECK(std::isfinite(analytic_solution(1e4, 1.0, 0.999)));
}

TEST_CASE("oscillation measure") {
  const std::vector<double> mono = {0, 0.1, 0.1, 0.5, 2.0};
  CHECK(oscillation_measure(mono) == 0.0);
  const std::vector<double> alt = {0, 1, 0, 1, 0};
  CHECK(oscillation_measure(alt) == doctest::Approx(3.0));
}

TEST_CASE("zero data gives the zero solution") {
  ConvDiff1DProblem p;
  p.velocity = 1.0;
  p.diffusivity = 0.1;
  const DiscreteSolution s = solve_bvp(p, 4);
  for (double c : s.nodal()) {
    CHECK(c == 0.0);
  }
  CHECK(s.evaluate(0.37) == 0.0);
}

TEST_CASE("condensed nodal values are nodally exact for the closed-form diffusivity") {
  // Linear elements with Gamma + bar_gamma_exact are nodally exact; the p-FEM
  // nodal values follow the same stencil with bar_gamma_p.
  ConvDiff1DProblem p = demo_problem();
  p.velocity = 1.0;
  p.diffusivity = 0.05;  // Pe = 1
  const DiscreteSolution s = solve_bvp(p, 3);
  const CondensedTridiagonal c = condense(3, p.velocity, p.diffusivity, p.element_size());
  for (int j = 1; j < p.elements; ++j) {
    const double r = c.stencil[0] * s.nodal()[j - 1] + c.stencil[1] * s.nodal()[j] + c.stencil[2] * s.nodal()[j + 1];
    CHECK(std::abs(r) < 1e-12);
  }
}

TEST_CASE("Pe = 5 demonstration problem") {
  const ConvDiff1DProblem p = demo_problem();
  CHECK(p.mesh_peclet() == doctest::Approx(5.0));
  const DiscreteSolution s1 = solve_bvp(p, 1);
  CHECK(oscillation_measure(s1.nodal()) > 0.0);
  double prev = 1e300;
  for (int deg : {1, 3, 5, 7}) {
    const double e = max_nodal_error(solve_bvp(p, deg), p);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("Galerkin solution converges in p for a smooth problem") {
  ConvDiff1DProblem p;
  p.velocity = 1.0;
  p.diffusivity = 0.5;
  p.right_value = 1.0;
  p.elements = 2;
  const DiscreteSolution s = solve_bvp(p, 8);
  for (double x : {0.13, 0.5, 0.81}) {
    CHECK(s.evaluate(x) == doctest::Approx(analytic_solution(1.0, 0.5, x)).epsilon(1e-8));
  }
}

TEST_CASE("unit source solution") {
  ConvDiff1DProblem p;
  p.velocity = 1.5;
  p.diffusivity = 0.2;
  p.source = [](double) { return 1.0; };
  p.elements = 4;
  const DiscreteSolution s = solve_bvp(p, 6);
  for (double x : {0.2, 0.55, 0.9}) {
    CHECK(s.evaluate(x) == doctest::Approx(analytic_solution_unit_source(1.5, 0.2, x)).epsilon(1e-6));
  }
}

TEST_CASE("problem validation") {
  ConvDiff1DProblem p;
  p.diffusivity = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p.diffusivity = 1.0;
  p.elements = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}
