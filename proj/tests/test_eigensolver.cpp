#include <cmath>
#include <vector>

#include "cellpop/eigensolver.hpp"
#include "cellpop/errors.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cellpop;

TEST_CASE("power iteration on a hand-built 2x2 operator") {
  KernelOperator op;
  op.nodes = {0.0, 1.0};
  op.weights = {0.5, 0.5};
  op.m = {2.0, 1.0, 1.0, 2.0};
  EigenPair p = leading_eigenpair(op);
  CHECK(p.mu == doctest::Approx(3.0).epsilon(1e-9));
  REQUIRE(p.v.size() == 2);
  CHECK(p.v[0] == doctest::Approx(p.v[1]).epsilon(1e-8));

  // Starting-vector independence.
  std::vector<double> start{5.0, 0.01};
  EigenPair q = leading_eigenpair(op, 1e-12, 100000, &start);
  CHECK(q.mu == doctest::Approx(p.mu).epsilon(1e-10));
}

TEST_CASE("pure regularization kernel has the closed-form eigenvalue") {
  // b = 0, B = 0: only the eps-regularization remains and
  // mu(lambda, eps) = 2 eps / (lambda + eps).
  ModelCoefficients m;
  m.growth = GrowthField::case1(1.0, 1.0);
  m.division = DivisionRate::zero();
  m.kernel = RepartitionKernel::uniform();
  // Long age axis: the truncated e^{-(lambda+eps) a} tail must be negligible.
  Grid g = Grid::make(1.0, 30, 40.0, 801);
  OperatorAssembler assembler(m, g);
  for (double lambda : {0.5, 1.0})
    for (double eps : {1e-2, 1e-3}) {
      double mu = mu_of_lambda(assembler, lambda, eps);
      CHECK(mu == doctest::Approx(2.0 * eps / (lambda + eps)).epsilon(2e-3));
    }
}

TEST_CASE("window model reproduces the closed-form eigenvalue curve") {
  OperatorAssembler assembler(fixtures::window_model(), fixtures::window_grid(), 4);
  auto mu_exact = [](double lam) {
    return 2.0 * (1.0 - std::exp(-(lam + 1.0) * 2.0)) / (lam + 1.0);
  };
  for (double lam : {0.0, 0.5, 1.0})
    CHECK(mu_of_lambda(assembler, lam, 1e-4) ==
          doctest::Approx(mu_exact(lam)).epsilon(2e-3));

  // mu(lambda) is strictly decreasing.
  double m0 = mu_of_lambda(assembler, 0.0, 1e-3);
  double m1 = mu_of_lambda(assembler, 0.6, 1e-3);
  double m2 = mu_of_lambda(assembler, 1.2, 1e-3);
  CHECK(m0 > m1);
  CHECK(m1 > m2);
}

TEST_CASE("window model eigenvalue, normalization and residuals") {
  const EigenSolution& sol = fixtures::window_solution();
  const Grid& g = fixtures::window_grid();

  CHECK(sol.lambda0 == doctest::Approx(fixtures::kWindowLambda).epsilon(5e-3));
  CHECK(integrate(g, sol.density) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(integrate_weighted(g, sol.density, sol.adjoint) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(sol.lambda1 - sol.lambda0) < 1e-3 * sol.lambda0);

  for (double v : sol.density.v) CHECK(v >= 0.0);
  for (double v : sol.adjoint.v) CHECK(v >= 0.0);

  const ResidualReport& r = sol.residuals;
  CHECK(r.r_B < 2e-2);
  CHECK(r.r_x < 2e-2);
  CHECK(r.r_a < 2e-2);
  CHECK(r.eta_ok);
  for (std::size_t k = 0; k < r.eta.size(); ++k)
    CHECK(r.eta_moment[k] <= r.eta_bound[k] * (1.0 + 1e-6));

  // Epsilon continuation contracts toward eps = 0.
  REQUIRE(sol.lambda_eps.size() == 3);
  CHECK(std::abs(sol.lambda_eps[2] - sol.lambda_eps[1]) <
        std::abs(sol.lambda_eps[1] - sol.lambda_eps[0]));
}

TEST_CASE("subcritical window rate raises the dedicated error") {
  ModelCoefficients m = fixtures::window_model();
  m.division = DivisionRate::constant_window(0.3, 2.0);  // B A = 0.6 < ln 2
  Grid g = Grid::make(1.0, 40, 12.0, 121);
  CHECK_THROWS_AS(solve_eigenvalue(m, g), subcritical_error);
}

TEST_CASE("equal mitosis collocates on the half domain") {
  ModelCoefficients m;
  m.growth = GrowthField::case1(1.0, 1.0);
  m.division = DivisionRate::power_window(2.0, 1.0, 0.0, DivisionRate::unbounded);
  m.kernel = RepartitionKernel::equal_mitosis();
  Grid g = Grid::make(1.0, 60, 8.0, 161);
  OperatorAssembler assembler(m, g);
  CHECK(assembler.dirac());
  CHECK(assembler.nodes().back() == doctest::Approx(0.5));
  EigenSolution sol = solve_eigenvalue(m, g);
  CHECK(sol.lambda0 > 0.0);
  CHECK(integrate(g, sol.density) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("eigen solve is deterministic") {
  ModelCoefficients m = fixtures::window_model();
  Grid g = Grid::make(1.0, 30, 12.0, 121);
  EigenSolution a = solve_eigenvalue(m, g);
  EigenSolution b = solve_eigenvalue(m, g);
  CHECK(a.lambda0 == b.lambda0);
  CHECK(a.boundary == b.boundary);
  CHECK(a.density.v == b.density.v);
}
