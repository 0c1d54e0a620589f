#include "cellpop/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "cellpop/numeric.hpp"

namespace cellpop {

namespace {

constexpr double kBreakTol = 1e-9;

// Coefficients c_i with sum c_i g_i ~ integral of piecewise-linear g over
// [lo, hi]; partial end cells are handled by interpolation.
void add_segment_weights(const std::vector<double>& nodes, double lo, double hi,
                         double scale, double* row, std::size_t stride) {
  lo = std::max(lo, nodes.front());
  hi = std::min(hi, nodes.back());
  if (hi <= lo || scale == 0.0) return;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), lo);
  std::size_t p = std::size_t(it - nodes.begin());
  if (p > 0) --p;
  for (; p + 1 < nodes.size() && nodes[p] < hi; ++p) {
    double s0 = std::max(lo, nodes[p]);
    double s1 = std::min(hi, nodes[p + 1]);
    if (s1 <= s0) continue;
    double h = nodes[p + 1] - nodes[p];
    double t0 = (s0 - nodes[p]) / h;
    double t1 = (s1 - nodes[p]) / h;
    double len = s1 - s0;
    double tm = 0.5 * (t0 + t1);
    row[p * stride] += scale * len * (1.0 - tm);
    row[(p + 1) * stride] += scale * len * tm;
  }
}

// Interpolation on a monotone row of trace positions; positive values are
// interpolated geometrically (the fields vary exponentially between widely
// spaced characteristics), with a linear fallback when a value vanishes.
double interp_trace_row(const std::vector<double>& xs,
                        const std::vector<double>& vals, double x) {
  if (x <= xs.front()) return vals.front();
  if (x >= xs.back()) return vals.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t hi = std::size_t(it - xs.begin());
  std::size_t lo = hi - 1;
  double h = xs[hi] - xs[lo];
  double t = h > 0.0 ? (x - xs[lo]) / h : 0.0;
  if (vals[lo] > 0.0 && vals[hi] > 0.0)
    return std::exp((1.0 - t) * std::log(vals[lo]) + t * std::log(vals[hi]));
  return (1.0 - t) * vals[lo] + t * vals[hi];
}

}  // namespace

std::vector<double> KernelOperator::apply(const std::vector<double>& v) const {
  std::size_t nn = n();
  std::vector<double> out(nn, 0.0);
  for (std::size_t i = 0; i < nn; ++i) {
    double s = 0.0;
    const double* row = m.data() + i * nn;
    for (std::size_t j = 0; j < nn; ++j) s += row[j] * v[j];
    out[i] = s;
  }
  return out;
}

OperatorAssembler::OperatorAssembler(const ModelCoefficients& model,
                                     const Grid& grid, int threads)
    : model_(model),
      grid_(grid),
      flow_(model.growth, model.division),
      threads_(std::max(1, threads)) {
  if (std::abs(grid_.x_max - model_.x_max()) > 1e-9 * model_.x_max())
    throw config_error("grid x_max does not match the growth field");
  traces_.resize(grid_.nx());
  parallel_columns(grid_.nx(), [&](std::size_t j) {
    traces_[j] = flow_.trace(grid_.a, grid_.x[j]);
  });
  recon_x_ = grid_.x;
  for (double t = 0.5 * grid_.x[1]; t > 1e-14 * grid_.x_max; t *= 0.5)
    recon_x_.push_back(t);
  for (double t = 0.5 * grid_.dx; t > 1e-14 * grid_.x_max; t *= 0.5)
    recon_x_.push_back(grid_.x_max - 0.5 * t);
  std::sort(recon_x_.begin(), recon_x_.end());
  recon_traces_.resize(recon_x_.size());
  parallel_columns(recon_x_.size(), [&](std::size_t j) {
    recon_traces_[j] = flow_.trace(grid_.a, recon_x_[j]);
  });
  if (dirac()) {
    std::size_t n = grid_.nx();
    z_.resize(n);
    wz_.assign(n, 0.5 * grid_.dx);
    for (std::size_t j = 0; j < n; ++j) z_[j] = 0.5 * grid_.x[j];
    wz_.front() = wz_.back() = 0.25 * grid_.dx;
    half_traces_.resize(n);
    parallel_columns(n, [&](std::size_t j) {
      half_traces_[j] = flow_.trace(grid_.a, z_[j]);
    });
  }
}

const std::vector<double>& OperatorAssembler::nodes() const {
  return dirac() ? z_ : grid_.x;
}
const std::vector<double>& OperatorAssembler::node_weights() const {
  return dirac() ? wz_ : grid_.wx;
}

void OperatorAssembler::parallel_columns(
    std::size_t n, const std::function<void(std::size_t)>& body) const {
  if (threads_ <= 1 || n < 2) {
    for (std::size_t j = 0; j < n; ++j) body(j);
    return;
  }
  std::size_t nw = std::min<std::size_t>(threads_, n);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w)
    pool.emplace_back([&, w]() {
      for (std::size_t j = w; j < n; j += nw) body(j);
    });
  for (auto& t : pool) t.join();
}

void OperatorAssembler::assemble_standard(KernelOperator& op, double lambda,
                                          double eps) const {
  const std::size_t n = grid_.nx();
  const std::size_t na = grid_.na();
  const double xm = grid_.x_max;
  const double a_supp = model_.division.age_support_end();
  op.nodes = grid_.x;
  op.weights = grid_.wx;
  op.m.assign(n * n, 0.0);
  double tail = 0.0;
  parallel_columns(n, [&](std::size_t j) {
    const Trace& t = traces_[j];
    double eps_col = 0.0;  // regularization part, constant across rows
    for (std::size_t k = 0; k < na; ++k) {
      double a = grid_.a[k];
      double eps_ind = 1.0;
      double tau = a;
      if (a_supp < DivisionRate::unbounded) {
        tau = std::min(a, a_supp);
        if (a > a_supp + kBreakTol)
          eps_ind = 0.0;
        else if (std::abs(a - a_supp) <= kBreakTol)
          eps_ind = 0.5;
      }
      double surv = std::exp(-lambda * a - t.int_b[k] - eps * tau);
      double c = 2.0 * grid_.wa[k] * surv * grid_.wx[j];
      if (c <= 0.0) continue;
      if (eps > 0.0 && eps_ind > 0.0) eps_col += c * eps * eps_ind / xm;
      double y = t.x[k];
      double bval = model_.division(a, y);
      if (bval <= 0.0) continue;
      if (y <= 0.0) {  // degenerate mother: all daughters at content 0
        op.m[0 * n + j] += c * bval / (grid_.cell_hi(0) - grid_.cell_lo(0));
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) {
        double lo = grid_.cell_lo(i);
        if (lo >= y) break;
        double hi = grid_.cell_hi(i);
        double bm = model_.kernel.mass_given(bval, lo, hi, y);
        if (bm > 0.0) op.m[i * n + j] += c * bm / (hi - lo);
      }
    }
    if (eps_col > 0.0)
      for (std::size_t i = 0; i < n; ++i) op.m[i * n + j] += eps_col;
  });
  // remaining a > A_max mass, assuming decay at rate lambda + B + eps
  for (std::size_t j = 0; j < n; ++j) {
    double b_end = model_.division(grid_.a_max + 1e-6, traces_[j].x[na - 1]);
    if (b_end <= 0.0) continue;
    double est = 2.0 * b_end *
                 std::exp(-lambda * grid_.a_max - traces_[j].int_b[na - 1]) /
                 std::max(lambda + b_end + eps, 1e-12);
    tail = std::max(tail, est);
  }
  op.tail_bound = tail;
  if (tail > 0.05)
    throw resolution_error(
        "age-quadrature tail estimate " + std::to_string(tail) +
        " exceeds 0.05: increase A_max");
}

void OperatorAssembler::assemble_dirac(KernelOperator& op, double lambda,
                                       double eps) const {
  const std::size_t n = z_.size();
  const std::size_t na = grid_.na();
  op.nodes = z_;
  op.weights = wz_;
  op.m.assign(n * n, 0.0);
  const double dz = z_[1] - z_[0];
  parallel_columns(n, [&](std::size_t j) {
    const Trace& t = half_traces_[j];
    // walk the monotone trace once; row targets 2 z_i are increasing in i
    std::size_t k = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double target = 2.0 * z_[i];  // mother content
      if (target < z_[j]) continue; // not reachable: X(a, z_j) >= z_j
      while (k + 1 < na && t.x[k + 1] < target) ++k;
      if (t.x[k + 1] < target) break;  // beyond the trace range within A_max
      double f, ib;
      if (target <= t.x[0]) {
        f = 0.0;
        ib = 0.0;
      } else {
        double span = t.x[k + 1] - t.x[k];
        double w = span > 0.0 ? (target - t.x[k]) / span : 0.0;
        f = t.age[k] + w * (t.age[k + 1] - t.age[k]);
        ib = t.int_b[k] + w * (t.int_b[k + 1] - t.int_b[k]);
      }
      double gam = model_.growth(f, target);
      if (gam <= 1e-12) continue;
      double bval = model_.division(f, target);
      if (bval <= 0.0) continue;
      // quadrature weight in the daughter variable with the jump of the
      // integrand at y = min(2 z_i, x_M/2) landing on a node
      double w_eff;
      if (2 * i <= n - 1) {  // upper limit is the node z_{2i}
        if (j > 2 * i) continue;
        w_eff = (j == 0 || j == 2 * i) ? 0.5 * dz : dz;
        if (j == 2 * i && j == 0) w_eff = 0.5 * dz;
      } else {
        w_eff = wz_[j];
      }
      double entry = w_eff * 4.0 * bval / gam * std::exp(-lambda * f - ib);
      op.m[i * n + j] += entry;
    }
  });
  // additive regularization eps * integral of g over [0, x_M/2], every row
  if (eps > 0.0)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) op.m[i * n + j] += eps * wz_[j];
  double tail = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double b_end = model_.division(grid_.a_max + 1e-6, half_traces_[j].x[na - 1]);
    if (b_end <= 0.0) continue;
    double est = 2.0 * b_end *
                 std::exp(-lambda * grid_.a_max - half_traces_[j].int_b[na - 1]) /
                 std::max(lambda + b_end + eps, 1e-12);
    tail = std::max(tail, est);
  }
  op.tail_bound = tail;
}

void OperatorAssembler::assemble_adjoint_standard(KernelOperator& op,
                                                  double lambda, double eps) const {
  const std::size_t n = grid_.nx();
  const std::size_t na = grid_.na();
  const double xm = grid_.x_max;
  const double a_supp = model_.division.age_support_end();
  op.nodes = grid_.x;
  op.weights = grid_.wx;
  op.m.assign(n * n, 0.0);
  parallel_columns(n, [&](std::size_t j) {  // row j: launch point x_j
    const Trace& t = traces_[j];
    double* row = op.m.data() + j * n;
    double eps_row = 0.0;
    for (std::size_t k = 0; k < na; ++k) {
      double a = grid_.a[k];
      double eps_ind = 1.0;
      double tau = a;
      if (a_supp < DivisionRate::unbounded) {
        tau = std::min(a, a_supp);
        if (a > a_supp + kBreakTol)
          eps_ind = 0.0;
        else if (std::abs(a - a_supp) <= kBreakTol)
          eps_ind = 0.5;
      }
      double surv = std::exp(-lambda * a - t.int_b[k] - eps * tau);
      double c = 2.0 * grid_.wa[k] * surv;
      if (c <= 0.0) continue;
      if (eps > 0.0 && eps_ind > 0.0) eps_row += c * eps * eps_ind / xm;
      double y = t.x[k];  // mother content X(a, x_j)
      double bval = model_.division(a, y);
      if (bval <= 0.0) continue;
      if (y <= 0.0) {  // degenerate mother: daughter integral collapses to 0
        row[0] += c * bval;
        continue;
      }
      if (model_.kernel.is_uniform()) {
        add_segment_weights(grid_.x, 0.0, y, c * bval / y, row, 1);
      } else if (model_.kernel.eta() > 0.0) {
        double eta = model_.kernel.eta();
        add_segment_weights(grid_.x, eta * y, (1.0 - eta) * y,
                            c * bval / ((1.0 - 2.0 * eta) * y), row, 1);
      } else {
        // tabulated profile: density-weighted trapezoid over [0, y]
        std::vector<double> tw(n, 0.0);
        add_segment_weights(grid_.x, 0.0, y, 1.0, tw.data(), 1);
        for (std::size_t i = 0; i < n; ++i)
          if (tw[i] > 0.0)
            row[i] += c * tw[i] *
                      model_.kernel.density(model_.division, a, grid_.x[i], y);
      }
    }
    if (eps_row > 0.0)
      for (std::size_t i = 0; i < n; ++i) row[i] += eps_row * grid_.wx[i];
  });
  op.tail_bound = 0.0;
}

void OperatorAssembler::assemble_adjoint_dirac(KernelOperator& op, double lambda,
                                               double eps) const {
  const std::size_t n = z_.size();
  const std::size_t na = grid_.na();
  op.nodes = z_;
  op.weights = wz_;
  op.m.assign(n * n, 0.0);
  parallel_columns(n, [&](std::size_t j) {  // row j: launch point z_j
    const Trace& t = half_traces_[j];
    double* row = op.m.data() + j * n;
    for (std::size_t k = 0; k < na; ++k) {
      double a = grid_.a[k];
      double y = t.x[k];
      double bval = model_.division(a, y);
      if (bval <= 0.0) continue;
      double c = 2.0 * grid_.wa[k] * bval * std::exp(-lambda * a - t.int_b[k]);
      // interpolation stencil of phi0 at the daughter content y/2
      double pos = 0.5 * y / (z_[1] - z_[0]);
      std::size_t p = std::min<std::size_t>(std::size_t(pos), n - 2);
      double frac = pos - double(p);
      row[p] += c * (1.0 - frac);
      row[p + 1] += c * frac;
    }
    for (std::size_t i = 0; i < n; ++i) row[i] += eps * wz_[i];
  });
  op.tail_bound = 0.0;
}

KernelOperator OperatorAssembler::assemble(double lambda, double eps) const {
  KernelOperator op;
  if (dirac())
    assemble_dirac(op, lambda, eps);
  else
    assemble_standard(op, lambda, eps);
  return op;
}

KernelOperator OperatorAssembler::assemble_adjoint(double lambda, double eps) const {
  KernelOperator op;
  if (dirac())
    assemble_adjoint_dirac(op, lambda, eps);
  else
    assemble_adjoint_standard(op, lambda, eps);
  return op;
}

std::vector<double> OperatorAssembler::extend_dirac_boundary(
    const std::vector<double>& g, double lambda) const {
  // phi0 beyond x_M/2 from the same forward integral, using the solved
  // values on [0, x_M/2]
  std::size_t n = grid_.nx();
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (grid_.x[j] <= z_.back() + 1e-12) {
      out[j] = interp_linear(z_, g, grid_.x[j]);
      continue;
    }
    const Trace& t = traces_[j];
    double s = 0.0;
    for (std::size_t k = 0; k < grid_.na(); ++k) {
      double bval = model_.division(grid_.a[k], t.x[k]);
      if (bval <= 0.0) continue;
      s += grid_.wa[k] * 2.0 * bval *
           std::exp(-lambda * grid_.a[k] - t.int_b[k]) *
           interp_linear(z_, g, 0.5 * t.x[k]);
    }
    out[j] = s;
  }
  return out;
}

EigenPair leading_eigenpair(const KernelOperator& op, double tol,
                            std::size_t max_iter, const std::vector<double>* start) {
  std::size_t n = op.n();
  if (n == 0) throw numeric_error("leading_eigenpair: empty operator");
  EigenPair out;
  std::vector<double> v;
  if (start) {
    v = *start;
    for (double x : v)
      if (!(x > 0.0))
        throw numeric_error("leading_eigenpair: starting vector must be positive");
  } else {
    v.assign(n, 1.0);
  }
  auto normalize = [&](std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += op.weights[j] * w[j];
    if (s <= 0.0) return 0.0;
    for (auto& x : w) x /= s;
    return s;
  };
  normalize(v);
  double mu_prev = -1.0;
  double gap = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::vector<double> w = op.apply(v);
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += op.weights[j] * w[j];
    if (mu <= 0.0) {  // operator annihilates the cone: spectral radius 0
      out.mu = 0.0;
      out.v = v;
      out.iterations = int(it);
      return out;
    }
    double resid = 0.0, vmax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      resid = std::max(resid, std::abs(w[j] - mu * v[j]));
      vmax = std::max(vmax, std::abs(v[j]));
    }
    for (std::size_t j = 0; j < n; ++j) w[j] /= mu;
    v.swap(w);
    gap = std::abs(mu - mu_prev);
    if (gap <= tol * std::max(1.0, mu) &&
        resid <= tol * std::max(1.0, mu) * std::max(vmax, 1e-300)) {
      out.mu = mu;
      out.v = v;
      out.iterations = int(it) + 1;
      return out;
    }
    mu_prev = mu;
  }
  throw numeric_error("leading_eigenpair: no convergence, Rayleigh gap " +
                      std::to_string(gap));
}

double mu_of_lambda(const OperatorAssembler& assembler, double lambda, double eps) {
  return leading_eigenpair(assembler.assemble(lambda, eps)).mu;
}

namespace {

// mu(lambda, eps) = 1 by bisection; bracket [0, hi] found by doubling.
double solve_mu_one(const std::function<double(double)>& mu, double tol,
                    double* mu_zero_out) {
  double mu0 = mu(0.0);
  if (mu_zero_out) *mu_zero_out = mu0;
  if (mu0 <= 1.0)
    throw subcritical_error(
        "no positive eigenvalue: mu(lambda=0) = " + std::to_string(mu0) +
        " <= 1 (subcritical model)");
  double hi = 1.0;
  int guard = 0;
  while (mu(hi) > 1.0) {
    hi *= 2.0;
    if (++guard > 60) throw numeric_error("eigenvalue bracket: mu stays above 1");
  }
  return bisect_root([&](double l) { return mu(l) - 1.0; }, 0.0, hi, tol, 200);
}

double extrapolate_eps(const std::vector<double>& eps,
                       const std::vector<double>& lam) {
  std::size_t n = lam.size();
  if (n == 1) return lam[0];
  double e1 = eps[n - 2], e0 = eps[n - 1];
  return lam[n - 1] - e0 * (lam[n - 2] - lam[n - 1]) / (e1 - e0);
}

}  // namespace

Field reconstruct_density(const std::vector<double>& boundary,
                          const OperatorAssembler& assembler, double lambda0) {
  const Grid& g = assembler.grid();
  std::size_t na = g.na(), nx = g.nx();
  const std::vector<double>& launches = assembler.recon_launches();
  std::size_t nl = launches.size();
  std::vector<double> b0(nl);
  for (std::size_t j = 0; j < nl; ++j)
    b0[j] = interp_linear(g.x, boundary, launches[j]);
  // Conservative remap: the mass carried by each launch interval is deposited
  // on the cells its image covers. The flow Jacobian is implicit in the image
  // width, so age-slice masses are exact even where the boundary profile is
  // nearly singular and nodal interpolation would lose them.
  Field N(na, nx, 0.0);
  std::vector<double> xs(nl), dens(nl);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nl; ++j) {
      const Trace& t = assembler.recon_trace(j);
      xs[j] = t.x[i];
      dens[j] = b0[j] * std::exp(-lambda0 * t.age[i] - t.int_b[i]);
    }
    for (std::size_t j = 0; j + 1 < nl; ++j) {
      double mass =
          0.5 * (dens[j] + dens[j + 1]) * (launches[j + 1] - launches[j]);
      if (mass <= 0.0) continue;
      double lo = xs[j], hi = xs[j + 1];
      if (hi - lo < 1e-14 * g.x_max) {  // image collapsed: single cell
        std::size_t m = std::min<std::size_t>(
            std::size_t(0.5 * (lo + hi) / g.dx + 0.5), nx - 1);
        N.at(i, m) += mass / g.wx[m];
        continue;
      }
      std::size_t m0 = std::min<std::size_t>(std::size_t(lo / g.dx + 0.5), nx - 1);
      if (m0 > 0) --m0;  // guard against boundary rounding
      for (std::size_t m = m0; m < nx && g.cell_lo(m) < hi; ++m) {
        double ov = std::min(hi, g.cell_hi(m)) - std::max(lo, g.cell_lo(m));
        if (ov > 0.0) N.at(i, m) += mass * (ov / (hi - lo)) / g.wx[m];
      }
    }
  }
  double total = integrate(g, N);
  if (!(total > 0.0))
    throw numeric_error("reconstruct_density: vanishing total mass");
  for (auto& v : N.v) v /= total;
  return N;
}

AdjointResult solve_adjoint(const OperatorAssembler& assembler, double lambda0,
                            std::vector<double> eps_schedule, double tol) {
  if (eps_schedule.empty())
    throw config_error("solve_adjoint: empty epsilon schedule");
  AdjointResult res;
  std::vector<double> lam;
  EigenPair last;
  for (double eps : eps_schedule) {
    double l = solve_mu_one(
        [&](double lambda) {
          return leading_eigenpair(assembler.assemble_adjoint(lambda, eps)).mu;
        },
        tol, nullptr);
    lam.push_back(l);
    last = leading_eigenpair(assembler.assemble_adjoint(l, eps));
  }
  res.lambda_eps = lam;
  res.lambda1 = extrapolate_eps(eps_schedule, lam);

  std::vector<double> phi0 =
      assembler.dirac() ? assembler.extend_dirac_boundary(last.v, lambda0)
                        : last.v;

  // phi(a, X(a,y)) by backward recursion along each characteristic
  const Grid& g = assembler.grid();
  const ModelCoefficients& model = assembler.model();
  std::size_t na = g.na(), nx = g.nx();
  std::vector<double> phi0_prefix = prefix_trapezoid(g.x, phi0);
  const std::vector<double>& launches = assembler.recon_launches();
  std::size_t nl = launches.size();
  Field on_trace(na, nl, 0.0);
  std::vector<double> db(na);
  const std::vector<double>& znodes = assembler.nodes();
  for (std::size_t j = 0; j < nl; ++j) {
    const Trace& t = assembler.recon_trace(j);
    for (std::size_t k = 0; k < na; ++k) {
      double y = t.x[k];
      if (assembler.dirac()) {
        double bval = model.division(g.a[k], y);
        db[k] = bval > 0.0 ? bval * interp_linear(znodes, last.v, 0.5 * y) : 0.0;
      } else {
        db[k] = model.kernel.daughter_integral(model.division, g.a[k], y, g.x,
                                               phi0, phi0_prefix);
      }
    }
    double phi_next = 0.0;
    on_trace.at(na - 1, j) = 0.0;
    for (std::size_t k = na - 1; k-- > 0;) {
      double decay = std::exp(-lambda0 * (g.a[k + 1] - g.a[k]) -
                              (t.int_b[k + 1] - t.int_b[k]));
      double local = 0.5 * (g.a[k + 1] - g.a[k]) *
                     (2.0 * db[k] + decay * 2.0 * db[k + 1]);
      phi_next = decay * phi_next + local;
      on_trace.at(k, j) = phi_next;
    }
  }
  // interpolate each age row from trace positions onto the x nodes
  res.phi = Field(na, nx, 0.0);
  std::vector<double> xs(nl), vals(nl);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nl; ++j) {
      xs[j] = assembler.recon_trace(j).x[i];
      vals[j] = on_trace.at(i, j);
    }
    for (std::size_t m = 0; m < nx; ++m)
      res.phi.at(i, m) = interp_trace_row(xs, vals, g.x[m]);
  }
  res.boundary = phi0;
  return res;
}

ResidualReport eigen_diagnostics(const EigenSolution& sol,
                                 const ModelCoefficients& model, const Grid& grid) {
  ResidualReport rep;
  double bn = 0.0, xn = 0.0, gn = 0.0, an = 0.0, abn = 0.0;
  rep.eta_moment.assign(rep.eta.size(), 0.0);
  rep.eta_bound.resize(rep.eta.size());
  for (std::size_t e = 0; e < rep.eta.size(); ++e)
    rep.eta_bound[e] = 1.0 / (1.0 - rep.eta[e]);
  for (std::size_t i = 0; i < grid.na(); ++i) {
    double a = grid.a[i];
    for (std::size_t j = 0; j < grid.nx(); ++j) {
      double w = grid.wa[i] * grid.wx[j];
      double Nv = sol.density.at(i, j);
      double B = model.division(a, grid.x[j]);
      bn += w * B * Nv;
      xn += w * grid.x[j] * Nv;
      gn += w * model.growth(a, grid.x[j]) * Nv;
      an += w * a * Nv;
      abn += w * a * B * Nv;
      for (std::size_t e = 0; e < rep.eta.size(); ++e)
        rep.eta_moment[e] += w * std::exp(sol.lambda0 * rep.eta[e] * a) * Nv;
    }
  }
  rep.r_B = std::abs(sol.lambda0 - bn);
  rep.r_x = std::abs(sol.lambda0 * xn - gn);
  rep.r_a = std::abs(sol.lambda0 * an + abn - 1.0);
  rep.r_adjoint = std::abs(sol.lambda1 - sol.lambda0);
  rep.eta_ok = true;
  for (std::size_t e = 0; e < rep.eta.size(); ++e)
    if (rep.eta_moment[e] > rep.eta_bound[e] + 1e-6) rep.eta_ok = false;
  return rep;
}

EigenSolution solve_eigenvalue(const ModelCoefficients& model, const Grid& grid,
                               std::vector<double> eps_schedule, double tol,
                               int threads) {
  if (eps_schedule.empty())
    throw config_error("solve_eigenvalue: empty epsilon schedule");
  OperatorAssembler assembler(model, grid, threads);
  EigenSolution sol;
  sol.eps_schedule = eps_schedule;
  double mu0_last = 0.0;
  for (double eps : eps_schedule) {
    double l = solve_mu_one(
        [&](double lambda) { return mu_of_lambda(assembler, lambda, eps); },
        tol, &mu0_last);
    sol.lambda_eps.push_back(l);
  }
  sol.mu_at_zero = mu0_last;
  sol.lambda0 = extrapolate_eps(eps_schedule, sol.lambda_eps);

  double eps_min = eps_schedule.back();
  EigenPair pair =
      leading_eigenpair(assembler.assemble(sol.lambda_eps.back(), eps_min));
  if (assembler.dirac()) {
    // map the [0, x_M/2] eigenvector to a boundary profile on the x nodes
    sol.boundary.assign(grid.nx(), 0.0);
    const std::vector<double>& z = assembler.nodes();
    for (std::size_t j = 0; j < grid.nx(); ++j)
      sol.boundary[j] = grid.x[j] <= z.back() + 1e-12
                            ? interp_linear(z, pair.v, grid.x[j])
                            : 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < grid.nx(); ++j) s += grid.wx[j] * sol.boundary[j];
    for (auto& v : sol.boundary) v /= s;
  } else {
    sol.boundary = pair.v;
  }
  sol.density = reconstruct_density(sol.boundary, assembler, sol.lambda0);

  AdjointResult adj = solve_adjoint(assembler, sol.lambda0, eps_schedule, tol);
  sol.lambda1 = adj.lambda1;
  sol.adjoint = adj.phi;
  double dual = integrate_weighted(grid, sol.density, sol.adjoint);
  if (dual > 0.0)
    for (auto& v : sol.adjoint.v) v /= dual;
  sol.residuals = eigen_diagnostics(sol, model, grid);
  return sol;
}

}  // namespace cellpop
