#include "cellpop/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cellpop/characteristics.hpp"
#include "cellpop/eigensolver.hpp"
#include "cellpop/errors.hpp"
#include "cellpop/numeric.hpp"
#include "cellpop/transport.hpp"
#include "cellpop/twophase.hpp"

namespace cellpop {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name,
                       std::vector<std::string>& files) {
  std::filesystem::create_directories(dir);
  std::string path = dir + "/" + name;
  std::ofstream out(path);
  if (!out) throw config_error("cannot open output file '" + path + "'");
  files.push_back(path);
  return out;
}

void write_field_csv(std::ofstream& out, const Grid& g, const Field& f,
                     const char* col) {
  out << "a,x," << col << "\n";
  for (std::size_t i = 0; i < g.na(); ++i)
    for (std::size_t j = 0; j < g.nx(); ++j)
      out << fmt(g.a[i]) << ',' << fmt(g.x[j]) << ',' << fmt(f.at(i, j))
          << '\n';
}

int threads_of(const Config& cfg) {
  return int(cfg.get_count("solver", "threads", 1));
}

EigenSolution solve_from_config(const Config& cfg,
                                const ModelCoefficients& model, const Grid& g) {
  std::vector<double> eps =
      cfg.get_list("solver", "eps", {1e-2, 1e-3, 1e-4});
  double tol = cfg.get_num("solver", "tol", 1e-8);
  if (tol <= 0.0) throw config_error("config: solver.tol must be positive");
  return solve_eigenvalue(model, g, eps, tol, threads_of(cfg));
}

}  // namespace

RunResult run_eigen(const Config& cfg, const std::string& out_dir) {
  RunResult res;
  ModelCoefficients model = build_model(cfg);
  Grid g = build_grid(cfg, model);
  EigenSolution sol = solve_from_config(cfg, model, g);

  auto summary = open_out(out_dir, "summary.txt", res.files);
  summary << "lambda0 = " << fmt(sol.lambda0) << "\n";
  summary << "lambda1 = " << fmt(sol.lambda1) << "\n";
  summary << "mu_at_zero = " << fmt(sol.mu_at_zero) << "\n";
  summary << "r_B = " << fmt(sol.residuals.r_B) << "\n";
  summary << "r_x = " << fmt(sol.residuals.r_x) << "\n";
  summary << "r_a = " << fmt(sol.residuals.r_a) << "\n";
  summary << "r_adjoint = " << fmt(sol.residuals.r_adjoint) << "\n";
  summary << "eta_ok = " << (sol.residuals.eta_ok ? 1 : 0) << "\n";
  summary << "nx = " << g.nx() << "\nna = " << g.na() << "\n";
  summary << "x_max = " << fmt(g.x_max) << "\na_max = " << fmt(g.a_max) << "\n";
  for (std::size_t k = 0; k < sol.eps_schedule.size(); ++k)
    summary << "lambda_eps_" << fmt(sol.eps_schedule[k]) << " = "
            << fmt(sol.lambda_eps[k]) << "\n";

  auto ncsv = open_out(out_dir, "N.csv", res.files);
  write_field_csv(ncsv, g, sol.density, "N");
  auto pcsv = open_out(out_dir, "phi.csv", res.files);
  write_field_csv(pcsv, g, sol.adjoint, "phi");
  auto bcsv = open_out(out_dir, "boundary.csv", res.files);
  bcsv << "x,N0\n";
  for (std::size_t j = 0; j < g.nx(); ++j)
    bcsv << fmt(g.x[j]) << ',' << fmt(sol.boundary[j]) << '\n';

  res.summary = {{"lambda0", sol.lambda0},
                 {"lambda1", sol.lambda1},
                 {"mu_at_zero", sol.mu_at_zero},
                 {"r_B", sol.residuals.r_B},
                 {"r_x", sol.residuals.r_x},
                 {"r_a", sol.residuals.r_a},
                 {"r_adjoint", sol.residuals.r_adjoint}};
  return res;
}

RunResult run_simulate(const Config& cfg, const std::string& out_dir) {
  RunResult res;
  ModelCoefficients model = build_model(cfg);
  Grid g = build_grid(cfg, model);
  EigenSolution sol = solve_from_config(cfg, model, g);

  SimulateOptions opts;
  opts.horizon = cfg.get_num("simulate", "horizon", 10.0);
  if (opts.horizon <= 0.0)
    throw config_error("config: simulate.horizon must be positive");
  opts.renormalize = cfg.get_bool("simulate", "renormalize", true);
  std::string ent = cfg.get_str("simulate", "entropy", "quadratic");
  if (ent == "quadratic")
    opts.entropy = EntropyFunctional::quadratic();
  else if (ent == "absolute")
    opts.entropy = EntropyFunctional::absolute();
  else
    throw config_error("config: simulate.entropy must be quadratic|absolute");
  opts.snapshot_times = cfg.get_list("simulate", "snapshot_times", {});

  std::string init = cfg.get_str("simulate", "initial", "perturbed");
  double amp = cfg.get_num("simulate", "amplitude", 0.5);
  Field n0 = sol.density;
  if (init == "perturbed") {
    for (std::size_t i = 0; i < g.na(); ++i)
      for (std::size_t j = 0; j < g.nx(); ++j)
        n0.at(i, j) *= 1.0 + amp * std::sin(2.0 * M_PI * g.x[j] / g.x_max);
  } else if (init == "scaled") {
    for (double& v : n0.v) v *= amp;
  } else if (init != "eigen") {
    throw config_error("config: simulate.initial must be eigen|perturbed|scaled");
  }

  SimulationResult sim = simulate(n0, model, sol, g, opts);

  double drift = 0.0, max_inc = 0.0;
  double d0 = sim.series.duality.empty() ? 0.0 : sim.series.duality[0];
  for (std::size_t k = 0; k < sim.series.t.size(); ++k) {
    if (d0 != 0.0)
      drift = std::max(drift, std::abs(sim.series.duality[k] - d0) /
                                  std::abs(d0));
    if (k > 0)
      max_inc =
          std::max(max_inc, sim.series.entropy[k] - sim.series.entropy[k - 1]);
  }
  double dist0 = sim.series.distance.front();
  double dist_T = sim.series.distance.back();

  auto obs = open_out(out_dir, "observables.csv", res.files);
  obs << "t,mass,duality,entropy,distance\n";
  for (std::size_t k = 0; k < sim.series.t.size(); ++k)
    obs << fmt(sim.series.t[k]) << ',' << fmt(sim.series.mass[k]) << ','
        << fmt(sim.series.duality[k]) << ',' << fmt(sim.series.entropy[k])
        << ',' << fmt(sim.series.distance[k]) << '\n';
  obs << "# max_duality_drift = " << fmt(drift) << "\n";
  obs << "# max_entropy_increment = " << fmt(max_inc) << "\n";
  obs << "# distance_start = " << fmt(dist0) << "\n";
  obs << "# distance_end = " << fmt(dist_T) << "\n";

  for (std::size_t s = 0; s < sim.snapshots.size(); ++s) {
    auto snap = open_out(out_dir, "snapshot_" + std::to_string(s) + ".csv",
                         res.files);
    snap << "# t = " << fmt(sim.snapshots[s].t) << "\n";
    write_field_csv(snap, g, sim.snapshots[s].n, "n");
  }

  res.summary = {{"lambda0", sol.lambda0},
                 {"m0", sim.m0},
                 {"max_duality_drift", drift},
                 {"max_entropy_increment", max_inc},
                 {"distance_start", dist0},
                 {"distance_end", dist_T}};
  return res;
}

RunResult run_twophase(const Config& cfg, const std::string& out_dir) {
  RunResult res;
  ModelCoefficients model = build_model(cfg);
  if (!model.two_phase)
    throw config_error("config: twophase command needs a [twophase] section");
  Grid g = build_grid(cfg, model);
  EigenSolution sol = solve_from_config(cfg, model, g);
  const TwoPhaseParams& tp = *model.two_phase;

  double horizon = cfg.get_num("twophase", "horizon", 1000.0);
  if (horizon <= 0.0)
    throw config_error("config: twophase.horizon must be positive");

  double mean_l = tp.transition.mean_over(g);
  DispersionResult disp =
      lambda_from_lambda0(sol.lambda0, tp.d1, tp.d2, mean_l, tp.alpha2);

  LimitEigensystem lim;
  bool have_limit = tp.d2 == 0.0 && tp.d1 > 0.0 && tp.d1 < sol.lambda0 &&
                    mean_l > sol.lambda0 - tp.d1;
  if (have_limit) lim = limit_eigensystem(sol, g, tp.d1, mean_l);

  Field q0(g.na(), g.nx());
  TwoPhaseResult tr = simulate_twophase(model, g, sol.density, q0, horizon,
                                        have_limit ? &lim : nullptr);
  const TwoPhaseSeries& s = tr.series;

  // Regime: decay when the population ends below its start; otherwise the
  // better of the power-law and exponential fits on the late window decides.
  double fit_lo = cfg.get_num("twophase", "fit_lo_frac", 0.5) * horizon;
  std::string regime;
  double slope = 0.0;
  if (s.N.back() < s.N.front()) {
    regime = "exponential-decay";
    std::vector<double> lt, ln;
    for (std::size_t k = 0; k < s.t.size(); ++k)
      if (s.t[k] >= fit_lo && s.N[k] > 0.0) {
        lt.push_back(s.t[k]);
        ln.push_back(std::log(s.N[k]));
      }
    if (lt.size() >= 2) slope = fit_line(lt, ln).slope;  // decay rate
  } else {
    GrowthFit pw = growth_exponent(s.t, s.N, fit_lo, horizon);
    std::vector<double> lt, ln;
    for (std::size_t k = 0; k < s.t.size(); ++k)
      if (s.t[k] >= fit_lo) {
        lt.push_back(s.t[k]);
        ln.push_back(std::log(s.N[k]));
      }
    LineFit ex = fit_line(lt, ln);
    regime = pw.residual <= ex.residual ? "polynomial-growth"
                                        : "exponential-growth";
    slope = pw.slope;
  }

  SupersolutionReport sup;
  if (have_limit && regime == "polynomial-growth") {
    double C = (sol.lambda0 - tp.d1) / (mean_l + tp.d1 - sol.lambda0);
    double c3 = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.t.size(); ++k)
      if (s.S2[k] > 0.0) c3 = std::min(c3, s.N[k] / s.S2[k]);
    if (std::isfinite(c3) && c3 > 0.0)
      sup = s2_supersolution_check(s.t, s.S2, tp.hill_n, tp.alpha1, tp.theta,
                                   C, c3);
  }

  std::size_t stride =
      std::max<std::size_t>(1, cfg.get_count("output", "subsample", 0) > 0
                                   ? cfg.get_count("output", "subsample", 1)
                                   : s.t.size() / 4000 + 1);
  auto traj = open_out(out_dir, "trajectory.csv", res.files);
  traj << "t,N,P,Q,G,S2,R\n";
  for (std::size_t k = 0; k < s.t.size(); k += stride)
    traj << fmt(s.t[k]) << ',' << fmt(s.N[k]) << ',' << fmt(s.P[k]) << ','
         << fmt(s.Q[k]) << ',' << fmt(s.G[k]) << ',' << fmt(s.S2[k]) << ','
         << fmt(s.R[k]) << '\n';

  auto summary = open_out(out_dir, "summary.txt", res.files);
  summary << "lambda0 = " << fmt(sol.lambda0) << "\n";
  summary << "mean_L = " << fmt(mean_l) << "\n";
  summary << "lambda = " << fmt(disp.lambda) << "\n";
  summary << "lambda_alt = " << fmt(disp.lambda_alt) << "\n";
  summary << "lambda_lower = " << fmt(disp.lambda_lower) << "\n";
  summary << "regime = " << regime << "\n";
  summary << "fitted_slope = " << fmt(slope) << "\n";
  summary << "N_start = " << fmt(s.N.front()) << "\n";
  summary << "N_end = " << fmt(s.N.back()) << "\n";
  if (have_limit) {
    summary << "limit_pop_norm_residual = " << fmt(lim.pop_norm_residual)
            << "\n";
    summary << "limit_dual_norm_residual = " << fmt(lim.dual_norm_residual)
            << "\n";
    summary << "supersolution_holds = " << (sup.holds ? 1 : 0) << "\n";
    summary << "supersolution_a = " << fmt(sup.a) << "\n";
    summary << "supersolution_c3 = " << fmt(sup.c3) << "\n";
  }

  res.label = regime;
  res.summary = {{"lambda0", sol.lambda0},
                 {"lambda", disp.lambda},
                 {"fitted_slope", slope},
                 {"N_end", s.N.back()},
                 {"regime_growth", regime == "exponential-decay" ? 0.0 : 1.0}};
  return res;
}

RunResult run_validate(const Config& cfg, const std::string& out_dir) {
  RunResult res;
  ModelCoefficients model = build_model(cfg);
  Grid g = build_grid(cfg, model);
  FlowSolver flow(model.growth, model.division);
  WeakAssumptionReport rep = check_weak_assumptions(flow, model.kernel, g);
  KernelMomentReport km = check_kernel_consistency(model.kernel,
                                                   model.division, g);
  bool zero_curve_ok = model.growth.zero_curve_nondecreasing(g.a_max);

  auto out = open_out(out_dir, "validate.txt", res.files);
  auto line = [&](const char* name, bool ok, double value) {
    out << (ok ? "PASS" : "FAIL") << ' ' << name << " = " << fmt(value)
        << "\n";
  };
  if (model.division.compact_age_support())
    out << "INFO survival_mass_truncated = " << fmt(rep.survival_mass)
        << " (compact age support: the integrand is constant past the "
           "support, so integrability is not required)\n";
  else
    line("survival_mass_finite", rep.survival_tail < 0.05 * rep.survival_mass,
         rep.survival_mass);
  line("min_birth_integral_exceeds_log2", rep.exceeds_log2,
       rep.min_birth_integral);
  if (rep.compact_ratio >= 0.0)
    out << "INFO compact_ratio = " << fmt(rep.compact_ratio)
        << (rep.compact_ratio_ok
                ? " (< 1/2)\n"
                : " (>= 1/2; the ratio is 1 at the support edge for any "
                  "rate-proportional kernel, so positivity falls back to the "
                  "log 2 margin)\n");
  line("kernel_zeroth_moment", km.max_zeroth_residual < 1e-6,
       km.max_zeroth_residual);
  line("kernel_first_moment", km.max_first_residual < 1e-6,
       km.max_first_residual);
  line("zero_curve_nondecreasing", zero_curve_ok, zero_curve_ok ? 1.0 : 0.0);
  line("positivity_expected", rep.positivity_expected,
       rep.positivity_expected ? 1.0 : 0.0);

  res.summary = {{"survival_mass", rep.survival_mass},
                 {"survival_tail", rep.survival_tail},
                 {"min_birth_integral", rep.min_birth_integral},
                 {"compact_ratio", rep.compact_ratio},
                 {"kernel_zeroth_residual", km.max_zeroth_residual},
                 {"kernel_first_residual", km.max_first_residual},
                 {"positivity_expected", rep.positivity_expected ? 1.0 : 0.0}};
  return res;
}

RunResult run_sweep(const Config& cfg, const std::string& out_dir) {
  RunResult res;
  std::string key = cfg.get_str("sweep", "key");
  std::size_t dot = key.find('.');
  if (dot == std::string::npos)
    throw config_error("config: sweep.key must look like section.key");
  std::string sec = key.substr(0, dot), k = key.substr(dot + 1);
  std::vector<double> values = cfg.get_list("sweep", "values", {});
  std::string command = cfg.get_str("sweep", "command", "eigen");

  std::vector<std::map<std::string, double>> rows;
  for (double v : values) {
    Config point = cfg;
    point.set(sec, k, fmt(v));
    std::string sub_dir = out_dir + "/point_" + fmt(v);
    RunResult sub;
    if (command == "eigen")
      sub = run_eigen(point, sub_dir);
    else if (command == "simulate")
      sub = run_simulate(point, sub_dir);
    else if (command == "twophase")
      sub = run_twophase(point, sub_dir);
    else if (command == "validate")
      sub = run_validate(point, sub_dir);
    else
      throw config_error("config: sweep.command: unknown command '" + command +
                         "'");
    sub.summary[key] = v;
    rows.push_back(sub.summary);
    res.files.insert(res.files.end(), sub.files.begin(), sub.files.end());
  }

  std::vector<std::string> cols{key};
  for (const auto& row : rows)
    for (const auto& [name, _] : row)
      if (std::find(cols.begin(), cols.end(), name) == cols.end())
        cols.push_back(name);

  auto out = open_out(out_dir, "sweep.csv", res.files);
  for (std::size_t c = 0; c < cols.size(); ++c)
    out << cols[c] << (c + 1 == cols.size() ? '\n' : ',');
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto it = row.find(cols[c]);
      out << (it == row.end() ? "" : fmt(it->second))
          << (c + 1 == cols.size() ? '\n' : ',');
    }
  }
  res.summary["points"] = double(rows.size());
  return res;
}

void emit_plot_script(const std::string& command, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir + "/plot.py");
  out << "#!/usr/bin/env python3\n"
         "import csv, os\n"
         "import matplotlib\n"
         "matplotlib.use('Agg')\n"
         "import matplotlib.pyplot as plt\n"
         "here = os.path.dirname(os.path.abspath(__file__))\n"
         "def load(name):\n"
         "    rows = []\n"
         "    with open(os.path.join(here, name)) as f:\n"
         "        for row in csv.reader(f):\n"
         "            if not row or row[0].startswith('#'): continue\n"
         "            rows.append(row)\n"
         "    head, data = rows[0], rows[1:]\n"
         "    return head, [[float(c) for c in r] for r in data]\n";
  if (command == "twophase") {
    out << "head, data = load('trajectory.csv')\n"
           "t = [r[0] for r in data]\n"
           "for idx, name in [(1, 'N'), (2, 'P')]:\n"
           "    plt.loglog(t[1:], [r[idx] for r in data[1:]], label=name)\n"
           "plt.loglog(t[1:], [r[6] for r in data[1:]], '--', label='P/N')\n"
           "plt.xlabel('t'); plt.legend(); plt.savefig('twophase.png', dpi=150)\n";
  } else if (command == "simulate") {
    out << "head, data = load('observables.csv')\n"
           "t = [r[0] for r in data]\n"
           "for idx in range(1, len(head)):\n"
           "    plt.plot(t, [r[idx] for r in data], label=head[idx])\n"
           "plt.xlabel('t'); plt.legend(); plt.savefig('observables.png', dpi=150)\n";
  } else {
    out << "head, data = load('boundary.csv')\n"
           "plt.plot([r[0] for r in data], [r[1] for r in data])\n"
           "plt.xlabel('x'); plt.ylabel('N0'); plt.savefig('boundary.png', dpi=150)\n";
  }
}

}  // namespace cellpop
