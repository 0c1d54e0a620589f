// Acceptance gate: one pass/fail line per criterion, all tolerances pinned
// here. Exit status is the number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cellpop/eigensolver.hpp"
#include "cellpop/errors.hpp"
#include "cellpop/numeric.hpp"
#include "cellpop/transport.hpp"
#include "cellpop/twophase.hpp"

using namespace cellpop;

namespace {

int g_failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, title,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void run(int id, const char* title,
         const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    report(id, title, ok, detail);
  } catch (const std::exception& e) {
    report(id, title, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

constexpr int kThreads = 4;

ModelCoefficients window_model(double level = 1.0) {
  ModelCoefficients m;
  m.growth = GrowthField::case1(1.0, 1.0);
  m.division = DivisionRate::constant_window(level, 2.0);
  m.kernel = RepartitionKernel::uniform();
  return m;
}

// Case3 growth with a hill-in-age-gated content division rate.
ModelCoefficients staged_model() {
  ModelCoefficients m;
  m.growth = GrowthField::case3(0.1, 0.075, 3.0, 1.95, 0.4);
  m.division = DivisionRate::hill_age(1.2, 1.5, 5.0, 23.0);
  m.kernel = RepartitionKernel::uniform();
  return m;
}

// a_max near `target` moved so that a node lands on the rate breakpoint.
Grid aligned_grid(double x_max, std::size_t nx, double target, std::size_t na,
                  double breakpoint) {
  double cells = std::floor(breakpoint * double(na - 1) / target);
  double a_max = breakpoint * double(na - 1) / cells;
  return Grid::make(x_max, nx, a_max, na);
}

double window_mu_exact(double lam) {
  return 2.0 * (1.0 - std::exp(-(lam + 1.0) * 2.0)) / (lam + 1.0);
}

Field perturbed(const Field& base, const Grid& g, double amp) {
  Field n = base;
  for (std::size_t i = 0; i < g.na(); ++i)
    for (std::size_t j = 0; j < g.nx(); ++j)
      n.at(i, j) *= 1.0 + amp * std::sin(2.0 * M_PI * g.x[j] / g.x_max);
  return n;
}

struct DriftResult {
  double drift = 0.0;          // max_t |D(t) - D(0)| / D(0)
  double max_entropy_up = 0.0; // largest per-step entropy increase
  double h0 = 0.0, hT = 0.0;
  double d0 = 0.0, dT = 0.0;
};

DriftResult drift_run(const ModelCoefficients& model, std::size_t nx,
                      std::size_t na, double horizon) {
  Grid g = aligned_grid(model.x_max(), nx, 92.0, na, 23.0);
  EigenSolution sol = solve_eigenvalue(model, g, {1e-2, 1e-3, 1e-4}, 1e-8,
                                       kThreads);
  SimulateOptions opts;
  opts.horizon = horizon;
  opts.renormalize = true;
  SimulationResult res = simulate(perturbed(sol.density, g, 0.5), model, sol,
                                  g, opts);
  DriftResult out;
  for (double d : res.series.duality)
    out.drift = std::max(out.drift, std::abs(d - res.m0) / res.m0);
  const auto& H = res.series.entropy;
  for (std::size_t k = 1; k < H.size(); ++k)
    out.max_entropy_up = std::max(out.max_entropy_up, H[k] - H[k - 1]);
  out.h0 = H.front();
  out.hT = H.back();
  out.d0 = res.series.distance.front();
  out.dT = res.series.distance.back();
  return out;
}

ModelCoefficients figure_model(double d1, double hill_n) {
  ModelCoefficients m = staged_model();
  TwoPhaseParams tp;
  tp.d1 = d1;
  tp.d2 = 0.0;
  tp.transition = TransitionRate::hill_in_x(4.0, 2.0, 5.0, 18.0);
  tp.alpha1 = 8.0;
  tp.alpha2 = 0.0;
  tp.theta = 1.0;
  tp.hill_n = hill_n;
  m.two_phase = tp;
  return m;
}

}  // namespace

int main() {
  // Shared solves reused across criteria 1-4.
  ModelCoefficients win = window_model();
  ModelCoefficients stg = staged_model();

  // --- 1: closed-form mu(lambda) oracle at Nx = Na = 400 -------------------
  run(1, "compact-support oracle", []() -> std::pair<bool, std::string> {
    ModelCoefficients m = window_model();
    Grid g = aligned_grid(1.0, 400, 12.0, 400, 2.0);
    OperatorAssembler assembler(m, g, kThreads);
    double worst = 0.0;
    for (double lam : {0.0, 0.5, 0.96, 1.5}) {
      double mu = mu_of_lambda(assembler, lam, 1e-4);
      worst = std::max(worst, std::abs(mu - window_mu_exact(lam)) /
                                  window_mu_exact(lam));
    }
    EigenSolution sol = solve_eigenvalue(m, g, {1e-2, 1e-3, 1e-4}, 1e-8,
                                         kThreads);
    double root = bisect_root(
        [](double lam) { return window_mu_exact(lam) - 1.0; }, 0.0, 2.0,
        1e-12);
    double lam_err = std::abs(sol.lambda0 - root);
    bool sub_low = false, sup_high = false;
    try {  // B A = 0.68 < ln 2
      solve_eigenvalue(window_model(0.34), g, {1e-2, 1e-3, 1e-4}, 1e-8,
                       kThreads);
    } catch (const subcritical_error&) {
      sub_low = true;
    }
    try {  // B A = 0.72 > ln 2
      sup_high = solve_eigenvalue(window_model(0.36), g, {1e-2, 1e-3, 1e-4},
                                  1e-8, kThreads)
                     .lambda0 > 0.0;
    } catch (const subcritical_error&) {
    }
    bool ok = worst < 1e-3 && lam_err < 1e-3 && sub_low && sup_high;
    return {ok, "max rel mu err " + fmt(worst) + ", |lambda0 - root| " +
                    fmt(lam_err) + ", subcritical split at ln2 " +
                    (sub_low && sup_high ? "correct" : "WRONG")};
  });

  // --- 2: mu(0) = 2 for the staged model -----------------------------------
  run(2, "mu(0) = 2", [&]() -> std::pair<bool, std::string> {
    Grid g = aligned_grid(3.0, 120, 92.0, 401, 23.0);
    OperatorAssembler assembler(stg, g, kThreads);
    double mu0 = mu_of_lambda(assembler, 0.0, 1e-4);
    return {mu0 > 1.98 && mu0 < 2.02, "mu(0, 1e-4) = " + fmt(mu0)};
  });

  // Criteria 3 and 4 share the default-grid and doubled-grid solves.
  struct Solved {
    Grid g;
    EigenSolution sol;
  };
  auto solve_on = [](const ModelCoefficients& m, std::size_t nx,
                     std::size_t na, double a_target, double bp) {
    Grid g = aligned_grid(m.x_max(), nx, a_target, na, bp);
    EigenSolution sol = solve_eigenvalue(m, g, {1e-2, 1e-3, 1e-4}, 1e-8,
                                         kThreads);
    return Solved{g, std::move(sol)};
  };

  std::vector<Solved> base, fine;
  run(3, "moment identities", [&]() -> std::pair<bool, std::string> {
    base.push_back(solve_on(win, 120, 401, 12.0, 2.0));
    base.push_back(solve_on(stg, 120, 401, 92.0, 23.0));
    fine.push_back(solve_on(win, 240, 801, 12.0, 2.0));
    fine.push_back(solve_on(stg, 240, 801, 92.0, 23.0));
    bool ok = true;
    std::string detail;
    for (std::size_t k = 0; k < 2; ++k) {
      const ResidualReport& r0 = base[k].sol.residuals;
      const ResidualReport& r1 = fine[k].sol.residuals;
      ok = ok && r0.r_B < 1e-2 && r0.r_x < 1e-2 && r0.r_a < 1e-2;
      ok = ok && r1.r_B < r0.r_B && r1.r_x < r0.r_x && r1.r_a < r0.r_a;
      detail += (k == 0 ? "window r=(" : "; staged r=(") + fmt(r0.r_B) + "," +
                fmt(r0.r_x) + "," + fmt(r0.r_a) + ") -> (" + fmt(r1.r_B) +
                "," + fmt(r1.r_x) + "," + fmt(r1.r_a) + ")";
    }
    return {ok, detail};
  });

  run(4, "direct/adjoint agreement", [&]() -> std::pair<bool, std::string> {
    if (base.size() != 2) return {false, "criterion 3 solves unavailable"};
    bool ok = true;
    std::string detail;
    for (std::size_t k = 0; k < 2; ++k) {
      const EigenSolution& s = base[k].sol;
      double gap = std::abs(s.lambda1 - s.lambda0) / s.lambda0;
      double norm = integrate_weighted(base[k].g, s.density, s.adjoint);
      ok = ok && gap < 1e-3 && std::abs(norm - 1.0) < 1e-6;
      detail += (k == 0 ? "window " : "; staged ") + std::string("gap ") +
                fmt(gap) + ", |N.phi - 1| " + fmt(std::abs(norm - 1.0));
    }
    return {ok, detail};
  });

  // --- 5/6: duality drift and GRE decay on the staged model ----------------
  DriftResult coarse_run, fine_run;
  bool have_runs = false;
  run(5, "duality conservation", [&]() -> std::pair<bool, std::string> {
    coarse_run = drift_run(stg, 120, 1201, 100.0);
    fine_run = drift_run(stg, 240, 2401, 100.0);
    have_runs = true;
    bool ok = fine_run.drift < 1e-2 && fine_run.drift < 0.65 * coarse_run.drift;
    return {ok, "drift " + fmt(coarse_run.drift) + " -> " +
                    fmt(fine_run.drift) + " under mesh halving"};
  });

  run(6, "general relative entropy decay",
      [&]() -> std::pair<bool, std::string> {
        if (!have_runs) return {false, "criterion 5 runs unavailable"};
        // Per-step increases must stay within the scheme dissipation bound.
        double bound = 1e-4 * fine_run.h0;
        bool ok = fine_run.max_entropy_up <= bound &&
                  fine_run.hT < fine_run.h0 &&
                  fine_run.dT < 0.5 * fine_run.d0;
        return {ok, "max entropy step +" + fmt(fine_run.max_entropy_up) +
                        " (bound " + fmt(bound) + "), H " + fmt(fine_run.h0) +
                        " -> " + fmt(fine_run.hT) + ", d " + fmt(fine_run.d0) +
                        " -> " + fmt(fine_run.dT)};
      });

  // --- 7: dispersion relation ----------------------------------------------
  run(7, "dispersion relation", []() -> std::pair<bool, std::string> {
    std::mt19937 gen(20240814);
    std::uniform_real_distribution<double> rate(0.0, 5.0), gt(0.0, 10.0),
        l0(1e-6, 5.0);
    double worst_res = 0.0, worst_gap = 0.0;
    bool order_ok = true;
    for (int k = 0; k < 200; ++k) {
      DispersionResult r =
          lambda_from_lambda0(l0(gen), rate(gen), rate(gen), rate(gen), gt(gen));
      worst_res = std::max(worst_res, r.residual / (1.0 + r.lambda0));
      worst_gap = std::max(worst_gap, std::abs(r.lambda - r.lambda_alt) /
                                          (1.0 + std::abs(r.lambda)));
      order_ok = order_ok && r.lambda > r.lambda_lower - 1e-12;
    }
    // Engineered zeros: d1 = lambda0 - L d2 / G+.
    double worst_zero = 0.0;
    for (int k = 0; k < 50; ++k) {
      double lambda0 = l0(gen), d2 = rate(gen), L = rate(gen), g = gt(gen);
      double g_plus = g + d2;
      if (g_plus <= 1e-9) continue;
      double d1 = lambda0 - L * d2 / g_plus;
      if (d1 < 0.0) continue;
      ZeroCriterion z = lambda_zero_criterion(lambda0, d1, d2, L, g);
      DispersionResult r = lambda_from_lambda0(lambda0, d1, d2, L, g);
      if (z.zero) worst_zero = std::max(worst_zero, std::abs(r.lambda));
    }
    bool ok = worst_res < 1e-10 && worst_gap < 1e-10 && order_ok &&
              worst_zero < 1e-8;
    return {ok, "max residual " + fmt(worst_res) + ", max form gap " +
                    fmt(worst_gap) + ", max |lambda| at zero point " +
                    fmt(worst_zero)};
  });

  // --- 8: two-phase polynomial growth and decay ----------------------------
  run(8, "two-phase growth regimes", [&]() -> std::pair<bool, std::string> {
    Grid g = aligned_grid(3.0, 60, 92.0, 801, 23.0);
    EigenSolution sol = solve_eigenvalue(stg, g, {1e-2, 1e-3, 1e-4}, 1e-8,
                                         kThreads);
    Field q0(g.na(), g.nx());
    bool ok = true;
    std::string detail;
    for (double n : {1.0, 0.5, 1.0 / 3.0}) {
      ModelCoefficients m = figure_model(0.01, n);
      TwoPhaseResult res = simulate_twophase(m, g, sol.density, q0, 12000.0);
      GrowthFit f = growth_exponent(res.series.t, res.series.N, 6000.0,
                                    12000.0);
      double target = 1.0 / n;
      bool slope_ok = std::abs(f.slope - target) < 0.2 * target;
      // P/N must keep falling through the fit window.
      std::size_t k_mid = 0, k_end = res.series.t.size() - 1;
      while (res.series.t[k_mid] < 6000.0) ++k_mid;
      bool ratio_ok = res.series.R[k_end] < res.series.R[k_mid];
      ok = ok && slope_ok && ratio_ok;
      detail += "n=" + fmt(n) + ": slope " + fmt(f.slope) + " (target " +
                fmt(target) + (ratio_ok ? ", P/N falling); " : ", P/N NOT falling); ");
    }
    // d1 = 0.05: monotone eventual decay.
    ModelCoefficients dec = figure_model(0.05, 1.0);
    TwoPhaseResult res = simulate_twophase(dec, g, sol.density, q0, 600.0);
    const auto& N = res.series.N;
    std::size_t half = N.size() / 2;
    bool mono = true;
    for (std::size_t k = half + 1; k < N.size(); ++k)
      mono = mono && N[k] <= N[k - 1] * (1.0 + 1e-12);
    bool decay = N.back() < N.front();
    ok = ok && mono && decay;
    detail += "d1=0.05: N " + fmt(N.front()) + " -> " + fmt(N.back()) +
              (mono ? " monotone late decay" : " NOT monotone");
    return {ok, detail};
  });

  // --- 9: equal mitosis as the truncated-uniform limit ---------------------
  run(9, "equal-mitosis consistency", []() -> std::pair<bool, std::string> {
    ModelCoefficients m;
    m.growth = GrowthField::case1(1.0, 1.0);
    m.division = DivisionRate::power_window(2.0, 1.0, 0.0,
                                            DivisionRate::unbounded);
    Grid g = Grid::make(1.0, 200, 8.0, 201);
    m.kernel = RepartitionKernel::equal_mitosis();
    double lam_dirac =
        solve_eigenvalue(m, g, {1e-2, 1e-3, 1e-4}, 1e-8, kThreads).lambda0;
    std::vector<double> lams;
    for (double eta : {0.40, 0.45, 0.48}) {
      m.kernel = RepartitionKernel::truncated_uniform(eta);
      lams.push_back(
          solve_eigenvalue(m, g, {1e-2, 1e-3, 1e-4}, 1e-8, kThreads).lambda0);
    }
    double g0 = std::abs(lams[0] - lam_dirac);
    double g1 = std::abs(lams[1] - lam_dirac);
    double g2 = std::abs(lams[2] - lam_dirac);
    bool ok = g1 < g0 && g2 < g1 && g2 < 0.05 * lam_dirac;
    return {ok, "lambda0(eta) gaps " + fmt(g0) + " > " + fmt(g1) + " > " +
                    fmt(g2) + " toward " + fmt(lam_dirac)};
  });

  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
