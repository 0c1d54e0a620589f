#include "cellpop/grid.hpp"

namespace cellpop {

Grid Grid::make(double x_max, std::size_t nx, double a_max, std::size_t na) {
  if (nx < 16 || na < 16)
    throw config_error("grid sizes must be >= 16 (got nx=" + std::to_string(nx) +
                       ", na=" + std::to_string(na) + ")");
  if (x_max <= 0.0 || a_max <= 0.0)
    throw config_error("grid extents must be positive");
  Grid g;
  g.x_max = x_max;
  g.a_max = a_max;
  g.dx = x_max / double(nx - 1);
  g.da = a_max / double(na - 1);
  g.x.resize(nx);
  g.a.resize(na);
  g.wx.assign(nx, g.dx);
  g.wa.assign(na, g.da);
  for (std::size_t i = 0; i < nx; ++i) g.x[i] = double(i) * g.dx;
  for (std::size_t i = 0; i < na; ++i) g.a[i] = double(i) * g.da;
  g.x.back() = x_max;
  g.a.back() = a_max;
  g.wx.front() = g.wx.back() = 0.5 * g.dx;
  g.wa.front() = g.wa.back() = 0.5 * g.da;
  return g;
}

double integrate(const Grid& g, const Field& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.na; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < f.nx; ++j) row += g.wx[j] * f.at(i, j);
    s += g.wa[i] * row;
  }
  return s;
}

double integrate_weighted(const Grid& g, const Field& f, const Field& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.na; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < f.nx; ++j) row += g.wx[j] * f.at(i, j) * w.at(i, j);
    s += g.wa[i] * row;
  }
  return s;
}

}  // namespace cellpop
