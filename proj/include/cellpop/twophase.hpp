#pragma once

#include <cstddef>
#include <vector>

#include "cellpop/coefficients.hpp"
#include "cellpop/eigensolver.hpp"
#include "cellpop/grid.hpp"

namespace cellpop {

// Link between the one-phase eigenvalue lambda0 and the two-phase eigenvalue
// lambda for constant transition rate L.
struct DispersionResult {
  double lambda0 = 0.0, g_tilde = 0.0;
  double g_plus = 0.0, d_plus = 0.0, l_plus = 0.0;
  double lambda = 0.0;        // square-root form
  double lambda_alt = 0.0;    // rationalized form
  double lambda_lower = 0.0;  // strict lower bound
  double residual = 0.0;      // |f(lambda) - lambda0| after back-substitution
};

DispersionResult lambda_from_lambda0(double lambda0, double d1, double d2,
                                     double L, double g_tilde);

struct ZeroCriterion {
  bool zero = false;
  double residual = 0.0;  // G+ d+ + L d2
};

// lambda = 0 iff G+ d+ = -L d2.
ZeroCriterion lambda_zero_criterion(double lambda0, double d1, double d2,
                                    double L, double g_tilde,
                                    double tol = 1e-12);

// G~ -> 0 limit eigensystem (P2, Q2, phi2, psi2) built from the one-phase
// eigensolution; requires 0 < d1 < lambda0 and constant L > lambda0 - d1.
struct LimitEigensystem {
  double lambda0 = 0.0, d1 = 0.0, L = 0.0;
  Field P2, Q2, phi2, psi2;
  double pop_norm_residual = 0.0;   // |int (P2+Q2) - 1|
  double dual_norm_residual = 0.0;  // |int (phi2 P2 + psi2 Q2) - 1|
};

LimitEigensystem limit_eigensystem(const EigenSolution& sol, const Grid& grid,
                                   double d1, double L);

struct TwoPhaseSeries {
  std::vector<double> t, N, P, Q, G, S2, R;
};

struct TwoPhaseResult {
  TwoPhaseSeries series;
  Field p_final, q_final;
  double dt = 0.0;
};

// Nonlinear proliferating/quiescent run: p follows the renewal transport
// equation with sinks d1 + L and source G(N(t)) q; q is a pointwise ODE
// dq/dt = L p - (G(N(t)) + d2) q; N(t) is recomputed each step.
// `limit` (optional) supplies the (phi2, psi2) weights for the S2 series.
TwoPhaseResult simulate_twophase(const ModelCoefficients& model,
                                 const Grid& grid, const Field& p0,
                                 const Field& q0, double horizon,
                                 const LimitEigensystem* limit = nullptr);

struct GrowthFit {
  double slope = 0.0, intercept = 0.0, residual = 0.0;
};

// Least-squares slope of log N against log t on [t_lo, t_hi].
GrowthFit growth_exponent(const std::vector<double>& t,
                          const std::vector<double>& n, double t_lo,
                          double t_hi);

struct SupersolutionReport {
  double c = 0.0, c3 = 0.0;       // constants used in the bound
  double a = 0.0, t0 = 0.0;       // Sigma(t) = a (t + t0)^{1/n}
  bool holds = false;
  double first_crossing = -1.0;   // earliest S2 > Sigma with the initial a
  double a_needed = 0.0;          // smallest a making the bound hold
};

// Verifies S2(t) <= a (t+t0)^{1/n} with the tightest admissible a (or the
// supplied override); on violation reports the crossing and the enlarged a.
SupersolutionReport s2_supersolution_check(const std::vector<double>& t,
                                           const std::vector<double>& s2,
                                           double n_hill, double alpha1,
                                           double theta, double C, double C3,
                                           double a_override = 0.0,
                                           double t0_override = 0.0);

}  // namespace cellpop
