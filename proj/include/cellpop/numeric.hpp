#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cellpop {

// Piecewise-linear interpolation on sorted nodes; clamps outside the range.
double interp_linear(const std::vector<double>& nodes,
                     const std::vector<double>& values, double x);

// Prefix trapezoid integrals: out[i] = integral of the sampled function
// from nodes[0] to nodes[i].
std::vector<double> prefix_trapezoid(const std::vector<double>& nodes,
                                     const std::vector<double>& values);

// Bisection for a bracketed root of a continuous function.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double x_tol, int max_iter = 200);

// Least-squares line fit; returns {slope, intercept, rms residual}.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cellpop
