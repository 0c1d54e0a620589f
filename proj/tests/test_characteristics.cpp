#include <cmath>
#include <vector>

#include "cellpop/characteristics.hpp"
#include "doctest.h"

using namespace cellpop;

namespace {

FlowSolver logistic_solver() {
  return FlowSolver(GrowthField::case1(1.0, 1.0),
                    DivisionRate::constant_window(1.0, 2.0));
}

}  // namespace

TEST_CASE("logistic flow matches its closed form") {
  FlowSolver fs = logistic_solver();
  // X(a,x) = x e^{a} / (1 + x(e^{a} - 1)) for C1 = x_M = 1.
  CHECK(fs.forward(std::log(2.0), 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(fs.forward(0.0, 0.37) == doctest::Approx(0.37));
  CHECK(fs.forward(5.0, 0.0) == 0.0);
  for (double a : {0.3, 1.0, 2.7})
    for (double x : {0.1, 0.5, 0.9}) {
      double expect = x * std::exp(a) / (1.0 + x * (std::exp(a) - 1.0));
      CHECK(fs.forward(a, x) == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("inverse flow undoes the forward flow") {
  FlowSolver fs = logistic_solver();
  auto y = fs.inverse(std::log(2.0), 2.0 / 3.0);
  REQUIRE(y.has_value());
  CHECK(*y == doctest::Approx(0.5).epsilon(1e-8));
  for (double a : {0.2, 1.4})
    for (double x : {0.2, 0.6, 0.95}) {
      auto back = fs.inverse(a, fs.forward(a, x));
      REQUIRE(back.has_value());
      CHECK(*back == doctest::Approx(x).epsilon(1e-7));
    }
}

TEST_CASE("flow semigroup and monotonicity") {
  FlowSolver fs = logistic_solver();
  for (double a : {0.5, 1.5})
    for (double h : {0.3, 0.9}) {
      double direct = fs.forward(a + h, 0.4);
      FlowSolver::State s{0.4, 0.0, 0.0};
      s = fs.advance(s, 0.0, a);
      s = fs.advance(s, a, a + h);
      CHECK(s.x == doctest::Approx(direct).epsilon(1e-8));
    }
  for (double a : {0.5, 2.0})
    CHECK(fs.forward(a, 0.3) < fs.forward(a, 0.31));
}

TEST_CASE("survival weight matches the window closed form") {
  FlowSolver fs = logistic_solver();
  for (double a : {0.5, 1.999, 2.5, 6.0}) {
    double expect = std::exp(-std::min(a, 2.0));
    CHECK(fs.survival_weight(a, 0.5, 0.0) == doctest::Approx(expect).epsilon(1e-10));
  }
  // With lambda the weight gains e^{-lambda a}.
  CHECK(fs.survival_weight(1.0, 0.5, 0.7) ==
        doctest::Approx(std::exp(-1.0 - 0.7)).epsilon(1e-10));
}

TEST_CASE("divergence weight is the Jacobian of the flow") {
  FlowSolver fs = logistic_solver();
  double h = 1e-6;
  for (double a : {0.5, 1.7})
    for (double y : {0.2, 0.6}) {
      double dxda = (fs.forward(a, y + h) - fs.forward(a, y - h)) / (2.0 * h);
      CHECK(fs.divergence_weight(a, y) * dxda == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("arrival time inverts the launch-point map") {
  FlowSolver fs = logistic_solver();
  for (double a : {0.4, 1.3})
    for (double x : {0.3, 0.7}) {
      double mother = fs.forward(a, x);
      auto t = fs.arrival_time(x, mother, 10.0);
      REQUIRE(t.has_value());
      CHECK(*t == doctest::Approx(a).epsilon(1e-6));
    }
}

TEST_CASE("weak assumptions: window rate margins") {
  Grid g = Grid::make(1.0, 40, 12.0, 241);
  FlowSolver fs = logistic_solver();
  WeakAssumptionReport rep =
      check_weak_assumptions(fs, RepartitionKernel::uniform(), g);
  // B = 1 on [0,2]: the per-characteristic integral is exactly 2 > ln 2.
  CHECK(rep.min_birth_integral == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(rep.exceeds_log2);
  CHECK(rep.positivity_expected);
  // The ratio is evaluated and hits 1 at a = 0 where survival is still 1.
  CHECK(rep.compact_ratio >= 0.99);

  FlowSolver weak(GrowthField::case1(1.0, 1.0),
                  DivisionRate::constant_window(0.3, 2.0));
  WeakAssumptionReport sub =
      check_weak_assumptions(weak, RepartitionKernel::uniform(), g);
  CHECK(sub.min_birth_integral == doctest::Approx(0.6).epsilon(1e-10));
  CHECK_FALSE(sub.exceeds_log2);
  CHECK_FALSE(sub.positivity_expected);
}

TEST_CASE("weak assumptions: unbounded power rate is integrable") {
  FlowSolver fs(GrowthField::case1(1.0, 1.0),
                DivisionRate::power_window(2.0, 1.0, 0.0, DivisionRate::unbounded));
  Grid g = Grid::make(1.0, 40, 8.0, 161);
  WeakAssumptionReport rep =
      check_weak_assumptions(fs, RepartitionKernel::uniform(), g);
  CHECK(rep.survival_mass > 0.0);
  CHECK(rep.survival_tail < 0.05 * rep.survival_mass);
  CHECK(rep.compact_ratio < 0.0);  // ratio check not applicable
  CHECK(rep.exceeds_log2);
  CHECK(rep.positivity_expected);
}
