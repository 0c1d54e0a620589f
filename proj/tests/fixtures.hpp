#pragma once

#include <cmath>

#include "cellpop/eigensolver.hpp"

namespace fixtures {

// Constant-rate window model with a closed-form eigenvalue curve:
// mu(lambda) = 2B (1 - e^{-(lambda+B)A}) / (lambda+B), B = 1, A = 2.
inline const cellpop::ModelCoefficients& window_model() {
  static const cellpop::ModelCoefficients m = [] {
    cellpop::ModelCoefficients mc;
    mc.growth = cellpop::GrowthField::case1(1.0, 1.0);
    mc.division = cellpop::DivisionRate::constant_window(1.0, 2.0);
    mc.kernel = cellpop::RepartitionKernel::uniform();
    return mc;
  }();
  return m;
}

inline const cellpop::Grid& window_grid() {
  static const cellpop::Grid g = cellpop::Grid::make(1.0, 80, 12.0, 481);
  return g;
}

inline const cellpop::EigenSolution& window_solution() {
  static const cellpop::EigenSolution s = cellpop::solve_eigenvalue(
      window_model(), window_grid(), {1e-2, 1e-3, 1e-4}, 1e-8, 4);
  return s;
}

// Root of 2B(1 - e^{-(lambda+B)A}) = lambda + B for B = 1, A = 2.
constexpr double kWindowLambda = 0.96034520;

// Staged model: age-activated content division over a time-varying logistic
// growth field. Its eigenfunctions are smooth enough in content for the
// transport observables (shape, entropy, distance) to be well conditioned,
// unlike the window model whose density concentrates at the content ends.
inline const cellpop::ModelCoefficients& staged_model() {
  static const cellpop::ModelCoefficients m = [] {
    cellpop::ModelCoefficients mc;
    mc.growth = cellpop::GrowthField::case3(0.1, 0.075, 3.0, 1.95, 0.4);
    mc.division = cellpop::DivisionRate::hill_age(1.2, 1.5, 5.0, 23.0);
    mc.kernel = cellpop::RepartitionKernel::uniform();
    return mc;
  }();
  return m;
}

inline const cellpop::Grid& staged_grid() {
  // a_max near 92 nudged so a node lands on the age gate at 23.
  static const cellpop::Grid g = [] {
    double a_max = 23.0 * 600.0 / std::floor(23.0 * 600.0 / 92.0);
    return cellpop::Grid::make(3.0, 60, a_max, 601);
  }();
  return g;
}

inline const cellpop::EigenSolution& staged_solution() {
  static const cellpop::EigenSolution s = cellpop::solve_eigenvalue(
      staged_model(), staged_grid(), {1e-2, 1e-3, 1e-4}, 1e-8, 4);
  return s;
}

}  // namespace fixtures
