#include "cellpop/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cellpop/errors.hpp"
#include "cellpop/numeric.hpp"

namespace cellpop {

EntropyFunctional EntropyFunctional::quadratic() {
  EntropyFunctional h;
  h.kind_ = Kind::Quadratic;
  return h;
}

EntropyFunctional EntropyFunctional::absolute() {
  EntropyFunctional h;
  h.kind_ = Kind::Absolute;
  return h;
}

EntropyFunctional EntropyFunctional::tabulated(std::vector<double> u,
                                               std::vector<double> h) {
  if (u.size() < 2 || u.size() != h.size())
    throw config_error("tabulated entropy: need matching u/h samples (>= 2)");
  for (std::size_t i = 1; i < u.size(); ++i)
    if (u[i] <= u[i - 1]) throw config_error("tabulated entropy: u not increasing");
  EntropyFunctional f;
  f.kind_ = Kind::Tabulated;
  f.u_ = std::move(u);
  f.h_ = std::move(h);
  return f;
}

double EntropyFunctional::operator()(double u) const {
  switch (kind_) {
    case Kind::Quadratic:
      return (u - 1.0) * (u - 1.0);
    case Kind::Absolute:
      return std::abs(u - 1.0);
    case Kind::Tabulated:
      return interp_linear(u_, h_, u);
  }
  return 0.0;
}

TransportStepper::TransportStepper(const ModelCoefficients& model,
                                   const Grid& grid, double lambda0,
                                   bool renormalize)
    : model_(model), grid_(grid) {
  std::size_t nx = grid_.nx(), na = grid_.na();
  double dt = grid_.da, dx = grid_.dx;
  lamfac_ = renormalize ? std::exp(-dt * lambda0) : 1.0;

  surv_.assign(na * nx, 1.0);
  iface_.assign(na * (nx + 1), 0.0);
  birth_.assign(na * nx, 0.0);
  for (std::size_t i = 1; i < na; ++i) {
    double am = grid_.a[i] - 0.5 * dt;
    for (std::size_t j = 0; j < nx; ++j)
      surv_[i * nx + j] = std::exp(-dt * model_.division(am, grid_.x[j]));
    for (std::size_t f = 1; f < nx; ++f)
      iface_[i * (nx + 1) + f] = model_.growth(am, grid_.x[f] - 0.5 * dx);
  }
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t k = 0; k < nx; ++k)
      birth_[i * nx + k] = model_.division(grid_.a[i], grid_.x[k]);

  // Positivity/CFL: the outflow coefficient of every cell must stay <= 1.
  double worst = 0.0;
  for (std::size_t i = 1; i < na; ++i) {
    const double* gi = &iface_[i * (nx + 1)];
    for (std::size_t j = 0; j < nx; ++j) {
      double out = std::max(gi[j + 1], 0.0) + std::max(-gi[j], 0.0);
      worst = std::max(worst, dt * out / grid_.wx[j]);
    }
  }
  if (worst > 1.0 + 1e-12) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "CFL violated: dt*|Gamma|/dx = %.3f > 1; increase the age "
                  "resolution by a factor of at least %.2f",
                  worst, worst);
    throw resolution_error(msg);
  }

  // Daughter deposition fractions per mother node: frac[k*nx + j] is the share
  // of one division at content y_k landing in x-cell j, divided by the cell
  // width (so deposits read directly as densities).
  frac_.assign(nx * nx, 0.0);
  if (model_.kernel.is_dirac()) {
    for (std::size_t k = 0; k < nx; ++k) {
      double t = 0.5 * grid_.x[k];
      std::size_t j0 = std::min<std::size_t>(nx - 2, std::size_t(t / dx));
      double w = std::clamp((t - grid_.x[j0]) / dx, 0.0, 1.0);
      frac_[k * nx + j0] += (1.0 - w) / grid_.wx[j0];
      frac_[k * nx + j0 + 1] += w / grid_.wx[j0 + 1];
    }
  } else {
    for (std::size_t k = 0; k < nx; ++k) {
      double y = grid_.x[k];
      for (std::size_t j = 0; j < nx; ++j) {
        double lo = grid_.cell_lo(j);
        if (lo >= y && k > 0) break;
        frac_[k * nx + j] =
            model_.kernel.mass_given(1.0, lo, grid_.cell_hi(j), y) / grid_.wx[j];
        if (k == 0) break;  // y = 0: everything lands in the first cell
      }
    }
  }
}

std::vector<double> TransportStepper::renewal_row(const Field& n) const {
  std::size_t nx = grid_.nx(), na = grid_.na();
  std::vector<double> g(nx, 0.0), row(nx, 0.0);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t k = 0; k < nx; ++k)
      g[k] += grid_.wa[i] * birth_[i * nx + k] * n.at(i, k);
  for (std::size_t k = 0; k < nx; ++k) {
    double c = 2.0 * grid_.wx[k] * g[k];
    if (c == 0.0) continue;
    for (std::size_t j = 0; j < nx; ++j) row[j] += c * frac_[k * nx + j];
  }
  return row;
}

void TransportStepper::step(Field& n) const {
  std::size_t nx = grid_.nx(), na = grid_.na();
  double dt = grid_.da;
  std::vector<double> flux(nx + 1, 0.0);
  std::vector<double> g(nx, 0.0);  // birth quadrature, accumulated per row
  std::vector<double> row0(n.v.begin(), n.v.begin() + nx);

  for (std::size_t i = na; i-- > 1;) {
    const double* src = &n.v[(i - 1) * nx];
    double* dst = &n.v[i * nx];
    const double* gi = &iface_[i * (nx + 1)];
    for (std::size_t f = 1; f < nx; ++f)
      flux[f] = gi[f] > 0.0 ? gi[f] * src[f - 1] : gi[f] * src[f];
    for (std::size_t j = 0; j < nx; ++j) {
      double val = src[j] - dt * (flux[j + 1] - flux[j]) / grid_.wx[j];
      val = std::max(val, 0.0) * surv_[i * nx + j] * lamfac_;
      dst[j] = val;
      g[j] += grid_.wa[i] * birth_[i * nx + j] * val;
    }
  }
  // Boundary from the updated rows; the a = 0 node keeps its previous value
  // in the quadrature (one-step lag, first order like the rest).
  for (std::size_t k = 0; k < nx; ++k)
    g[k] += grid_.wa[0] * birth_[k] * row0[k];
  std::fill(n.v.begin(), n.v.begin() + nx, 0.0);
  for (std::size_t k = 0; k < nx; ++k) {
    double c = 2.0 * grid_.wx[k] * g[k];
    if (c == 0.0) continue;
    for (std::size_t j = 0; j < nx; ++j) n.v[j] += c * frac_[k * nx + j];
  }
}

double gre_entropy(const Field& n, const EigenSolution& ref, const Grid& grid,
                   const EntropyFunctional& H) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.na(); ++i)
    for (std::size_t j = 0; j < grid.nx(); ++j) {
      double nv = ref.density.at(i, j);
      if (nv <= 0.0) continue;
      s += grid.wa[i] * grid.wx[j] * nv * ref.adjoint.at(i, j) *
           H(n.at(i, j) / nv);
    }
  return s;
}

double phi_distance(const Field& n, const EigenSolution& ref, const Grid& grid,
                    double m0) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.na(); ++i)
    for (std::size_t j = 0; j < grid.nx(); ++j)
      s += grid.wa[i] * grid.wx[j] *
           std::abs(n.at(i, j) - m0 * ref.density.at(i, j)) *
           ref.adjoint.at(i, j);
  return s;
}

SimulationResult simulate(const Field& n0, const ModelCoefficients& model,
                          const EigenSolution& sol, const Grid& grid,
                          const SimulateOptions& opts) {
  if (n0.na != grid.na() || n0.nx != grid.nx())
    throw config_error("simulate: initial data not on the grid");
  TransportStepper stepper(model, grid, sol.lambda0, opts.renormalize);

  SimulationResult out;
  out.dt = stepper.dt();
  Field n = n0;
  out.m0 = integrate_weighted(grid, n, sol.adjoint);

  std::vector<double> snaps = opts.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;

  auto record = [&](double t) {
    out.series.t.push_back(t);
    out.series.mass.push_back(integrate(grid, n));
    out.series.duality.push_back(integrate_weighted(grid, n, sol.adjoint));
    out.series.entropy.push_back(gre_entropy(n, sol, grid, opts.entropy));
    out.series.distance.push_back(phi_distance(n, sol, grid, out.m0));
    while (next_snap < snaps.size() && t >= snaps[next_snap] - 1e-12) {
      out.snapshots.push_back({t, n});
      ++next_snap;
    }
  };

  record(0.0);
  std::size_t steps = std::size_t(std::ceil(opts.horizon / out.dt - 1e-9));
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(n);
    record(double(k) * out.dt);
  }
  out.final_state = std::move(n);
  return out;
}

}  // namespace cellpop
