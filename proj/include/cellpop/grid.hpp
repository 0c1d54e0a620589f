#pragma once

#include <cstddef>
#include <vector>

#include "cellpop/errors.hpp"

namespace cellpop {

// Tensor grid on [0,x_max] x [0,a_max] with trapezoid quadrature weights.
// The x weights double as finite-volume cell widths: cell i is
// [x[i]-dx/2, x[i]+dx/2] clipped to [0,x_max], and |cell_i| == wx[i].
struct Grid {
  std::vector<double> x, a;
  std::vector<double> wx, wa;
  double x_max = 0.0, a_max = 0.0;
  double dx = 0.0, da = 0.0;

  static Grid make(double x_max, std::size_t nx, double a_max, std::size_t na);

  std::size_t nx() const { return x.size(); }
  std::size_t na() const { return a.size(); }

  double cell_lo(std::size_t i) const { return i == 0 ? 0.0 : x[i] - 0.5 * dx; }
  double cell_hi(std::size_t i) const {
    return i + 1 == x.size() ? x_max : x[i] + 0.5 * dx;
  }
};

// Scalar field sampled on the (a,x) nodes, row-major in a.
struct Field {
  std::size_t na = 0, nx = 0;
  std::vector<double> v;

  Field() = default;
  Field(std::size_t na_, std::size_t nx_, double fill = 0.0)
      : na(na_), nx(nx_), v(na_ * nx_, fill) {}

  double& at(std::size_t i, std::size_t j) { return v[i * nx + j]; }
  double at(std::size_t i, std::size_t j) const { return v[i * nx + j]; }
};

// Quadrature of a field over the whole grid, optionally against a weight field.
double integrate(const Grid& g, const Field& f);
double integrate_weighted(const Grid& g, const Field& f, const Field& w);

}  // namespace cellpop
