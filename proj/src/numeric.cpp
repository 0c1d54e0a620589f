#include "cellpop/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "cellpop/errors.hpp"

namespace cellpop {

double interp_linear(const std::vector<double>& nodes,
                     const std::vector<double>& values, double x) {
  if (nodes.empty()) return 0.0;
  if (x <= nodes.front()) return values.front();
  if (x >= nodes.back()) return values.back();
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  std::size_t hi = std::size_t(it - nodes.begin());
  std::size_t lo = hi - 1;
  double h = nodes[hi] - nodes[lo];
  double t = h > 0.0 ? (x - nodes[lo]) / h : 0.0;
  return (1.0 - t) * values[lo] + t * values[hi];
}

std::vector<double> prefix_trapezoid(const std::vector<double>& nodes,
                                     const std::vector<double>& values) {
  std::vector<double> out(nodes.size(), 0.0);
  for (std::size_t i = 1; i < nodes.size(); ++i)
    out[i] = out[i - 1] +
             0.5 * (nodes[i] - nodes[i - 1]) * (values[i] + values[i - 1]);
  return out;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double x_tol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0))
    throw numeric_error("bisect_root: no sign change in bracket");
  for (int it = 0; it < max_iter && hi - lo > x_tol; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit fit;
  std::size_t n = std::min(x.size(), y.size());
  if (n < 2) throw numeric_error("fit_line: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = double(n) * sxx - sx * sx;
  if (denom == 0.0) throw numeric_error("fit_line: degenerate abscissae");
  fit.slope = (double(n) * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / double(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - fit.slope * x[i] - fit.intercept;
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / double(n));
  return fit;
}

}  // namespace cellpop
