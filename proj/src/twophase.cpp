#include "cellpop/twophase.hpp"

#include <algorithm>
#include <cmath>

#include "cellpop/errors.hpp"
#include "cellpop/numeric.hpp"
#include "cellpop/transport.hpp"

namespace cellpop {

DispersionResult lambda_from_lambda0(double lambda0, double d1, double d2,
                                     double L, double g_tilde) {
  if (d1 < 0.0 || d2 < 0.0 || L < 0.0 || g_tilde < 0.0)
    throw config_error("dispersion: rates must be nonnegative");
  DispersionResult r;
  r.lambda0 = lambda0;
  r.g_tilde = g_tilde;
  r.g_plus = g_tilde + d2;
  r.d_plus = d1 - lambda0;
  r.l_plus = L + d1 - lambda0;

  if (L == 0.0) {
    // The link formula collapses to lambda = lambda0 - d1.
    r.lambda = r.lambda_alt = lambda0 - d1;
  } else {
    double b = r.g_plus + r.l_plus;
    double c = r.d_plus * r.g_plus + d2 * L;
    double disc = std::max(b * b - 4.0 * c, 0.0);
    double root = std::sqrt(disc);
    r.lambda = 0.5 * (-b + root);
    r.lambda_alt = (b + root > 0.0) ? -2.0 * c / (b + root) : r.lambda;
  }

  double li = L + d1;
  double disc2 = (r.g_plus + li) * (r.g_plus + li) -
                 4.0 * (d1 * r.g_plus + L * d2);
  r.lambda_lower = 0.5 * (-(r.g_plus + li) + std::sqrt(std::max(disc2, 0.0)));

  double den = r.lambda + r.g_plus;
  double f = den != 0.0 ? r.lambda + d1 + L * (r.lambda + d2) / den
                        : r.lambda + d1;
  r.residual = std::abs(f - lambda0);
  return r;
}

ZeroCriterion lambda_zero_criterion(double lambda0, double d1, double d2,
                                    double L, double g_tilde, double tol) {
  double g_plus = g_tilde + d2;
  ZeroCriterion z;
  z.residual = g_plus * (d1 - lambda0) + L * d2;
  z.zero = std::abs(z.residual) <= tol * (1.0 + g_plus + L);
  return z;
}

LimitEigensystem limit_eigensystem(const EigenSolution& sol, const Grid& grid,
                                   double d1, double L) {
  if (!(d1 > 0.0) || !(d1 < sol.lambda0))
    throw config_error("limit eigensystem: need 0 < d1 < lambda0");
  double m = L + d1 - sol.lambda0;
  if (!(m > 0.0))
    throw config_error("limit eigensystem: need L > lambda0 - d1");

  LimitEigensystem lim;
  lim.lambda0 = sol.lambda0;
  lim.d1 = d1;
  lim.L = L;
  std::size_t na = grid.na(), nx = grid.nx();
  lim.P2 = Field(na, nx);
  lim.Q2 = Field(na, nx);
  lim.phi2 = Field(na, nx);
  lim.psi2 = Field(na, nx);
  double cp = 1.0 / (1.0 + m);                // int (P2 + Q2) = 1
  double cf = (1.0 + m) / (1.0 + m * m / L);  // int (phi2 P2 + psi2 Q2) = 1
  for (std::size_t k = 0; k < na * nx; ++k) {
    lim.P2.v[k] = cp * sol.density.v[k];
    lim.Q2.v[k] = m * lim.P2.v[k];
    lim.phi2.v[k] = cf * sol.adjoint.v[k];
    lim.psi2.v[k] = (m / L) * lim.phi2.v[k];
  }
  lim.pop_norm_residual =
      std::abs(integrate(grid, lim.P2) + integrate(grid, lim.Q2) - 1.0);
  lim.dual_norm_residual =
      std::abs(integrate_weighted(grid, lim.P2, lim.phi2) +
               integrate_weighted(grid, lim.Q2, lim.psi2) - 1.0);
  return lim;
}

TwoPhaseResult simulate_twophase(const ModelCoefficients& model,
                                 const Grid& grid, const Field& p0,
                                 const Field& q0, double horizon,
                                 const LimitEigensystem* limit) {
  if (!model.two_phase)
    throw config_error("two-phase simulation: model has no two-phase block");
  const TwoPhaseParams& tp = *model.two_phase;
  tp.validate();
  if (p0.na != grid.na() || p0.nx != grid.nx() || q0.na != grid.na() ||
      q0.nx != grid.nx())
    throw config_error("two-phase simulation: initial data not on the grid");

  TransportStepper stepper(model, grid, 0.0, false);
  double dt = stepper.dt();
  double g_max = std::max(tp.alpha1, tp.alpha2);
  if (dt * (g_max + tp.d2) > 1.0 || dt * (tp.d1 + tp.transition.sup()) > 1.0)
    throw resolution_error(
        "two-phase reaction step unstable: dt*(G_max + d2) or dt*(d1 + L) "
        "exceeds 1; increase the age resolution");

  std::size_t na = grid.na(), nx = grid.nx();
  Field lf(na, nx);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nx; ++j)
      lf.at(i, j) = tp.transition(grid.a[i], grid.x[j]);

  auto weighted = [&](const Field& f, const Field& w) {
    return w.v.empty() ? integrate(grid, f) : integrate_weighted(grid, f, w);
  };

  TwoPhaseResult out;
  out.dt = dt;
  Field p = p0, q = q0;

  auto record = [&](double t) {
    double pop_p = integrate(grid, p), pop_q = integrate(grid, q);
    double n_val = weighted(p, tp.phi_weight) + weighted(q, tp.psi_weight);
    out.series.t.push_back(t);
    out.series.N.push_back(n_val);
    out.series.P.push_back(pop_p);
    out.series.Q.push_back(pop_q);
    out.series.G.push_back(tp.recruitment(n_val));
    out.series.S2.push_back(
        limit ? integrate_weighted(grid, p, limit->phi2) +
                    integrate_weighted(grid, q, limit->psi2)
              : 0.0);
    out.series.R.push_back(n_val > 0.0 ? pop_p / n_val : 0.0);
  };

  record(0.0);
  std::size_t steps = std::size_t(std::ceil(horizon / dt - 1e-9));
  for (std::size_t k = 1; k <= steps; ++k) {
    double n_val = weighted(p, tp.phi_weight) + weighted(q, tp.psi_weight);
    double g = tp.recruitment(n_val);
    stepper.step(p);
    // Explicit Euler exchange from a common snapshot: the p loss dt(d1+L)p
    // matches the q gain dt L p exactly, so d1 = d2 = 0 conserves p + q.
    for (std::size_t m = 0; m < na * nx; ++m) {
      double pv = p.v[m], qv = q.v[m];
      p.v[m] = pv + dt * (g * qv - (tp.d1 + lf.v[m]) * pv);
      q.v[m] = qv + dt * (lf.v[m] * pv - (g + tp.d2) * qv);
    }
    record(double(k) * dt);
  }
  out.p_final = std::move(p);
  out.q_final = std::move(q);
  return out;
}

GrowthFit growth_exponent(const std::vector<double>& t,
                          const std::vector<double>& n, double t_lo,
                          double t_hi) {
  std::vector<double> lt, ln;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] <= 0.0 || t[k] < t_lo || t[k] > t_hi) continue;
    if (n[k] <= 0.0)
      throw numeric_error(
          "growth exponent: nonpositive population in the fit window (decay "
          "regime)");
    lt.push_back(std::log(t[k]));
    ln.push_back(std::log(n[k]));
  }
  if (lt.size() < 2)
    throw config_error("growth exponent: fewer than two samples in the window");
  LineFit f = fit_line(lt, ln);
  return {f.slope, f.intercept, f.residual};
}

SupersolutionReport s2_supersolution_check(const std::vector<double>& t,
                                           const std::vector<double>& s2,
                                           double n_hill, double alpha1,
                                           double theta, double C, double C3,
                                           double a_override,
                                           double t0_override) {
  if (t.empty() || t.size() != s2.size())
    throw config_error("supersolution check: need matching t/S2 series");
  if (n_hill <= 0.0 || theta <= 0.0 || C3 <= 0.0)
    throw config_error("supersolution check: need n, theta, C3 > 0");

  SupersolutionReport rep;
  rep.c = C;
  rep.c3 = C3;
  // Sigma' >= C Sigma alpha1 theta^n / (C3 Sigma)^n pins the minimal a.
  rep.a = a_override > 0.0
              ? a_override
              : theta * std::pow(n_hill * C * alpha1, 1.0 / n_hill) / C3;
  rep.t0 = t0_override > 0.0
               ? t0_override
               : (s2[0] > 0.0 ? std::pow(s2[0] / rep.a, n_hill) : 0.0);

  rep.holds = true;
  rep.a_needed = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    double base = std::pow(t[k] + rep.t0, 1.0 / n_hill);
    rep.a_needed = std::max(rep.a_needed, base > 0.0 ? s2[k] / base : 0.0);
    if (rep.holds && s2[k] > rep.a * base * (1.0 + 1e-9)) {
      rep.holds = false;
      rep.first_crossing = t[k];
    }
  }
  return rep;
}

}  // namespace cellpop
