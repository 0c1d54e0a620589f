#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "cellpop/errors.hpp"
#include "cellpop/runner.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  int threads = 0;  // 0 = take the config value
  bool plot = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "configuration file (INI)")
      ->required();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--threads", opts.threads,
                  "worker threads (overrides solver.threads)");
  cmd->add_flag("--emit-plot-script", opts.plot,
                "also write a matplotlib script next to the CSV output");
}

int dispatch(const std::string& name, const CommonOpts& opts) {
  try {
    cellpop::Config cfg = cellpop::Config::parse_file(opts.config_path);
    if (opts.threads > 0)
      cfg.set("solver", "threads", std::to_string(opts.threads));
    cellpop::RunResult res;
    if (name == "eigen")
      res = cellpop::run_eigen(cfg, opts.out_dir);
    else if (name == "simulate")
      res = cellpop::run_simulate(cfg, opts.out_dir);
    else if (name == "twophase")
      res = cellpop::run_twophase(cfg, opts.out_dir);
    else if (name == "validate")
      res = cellpop::run_validate(cfg, opts.out_dir);
    else
      res = cellpop::run_sweep(cfg, opts.out_dir);
    if (opts.plot) cellpop::emit_plot_script(name, opts.out_dir);
    for (const auto& [key, value] : res.summary)
      std::printf("%s = %.12g\n", key.c_str(), value);
    if (!res.label.empty()) std::printf("label = %s\n", res.label.c_str());
    return 0;
  } catch (const cellpop::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const cellpop::subcritical_error& e) {
    std::fprintf(stderr, "subcritical: %s\n", e.what());
    return 3;
  } catch (const cellpop::resolution_error& e) {
    std::fprintf(stderr, "resolution error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 5;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cellpop: eigenvalue and transport solver for the age-and-content "
      "structured cell division equation.\n"
      "CSV columns: eigen N.csv/phi.csv = a,x,value; boundary.csv = x,N0; "
      "simulate observables.csv = t,mass,duality,entropy,distance; "
      "twophase trajectory.csv = t,N,P,Q,G,S2,R; sweep.csv = one summary "
      "row per point."};
  app.require_subcommand(1);

  CommonOpts opts;
  const char* names[] = {"eigen", "simulate", "twophase", "validate", "sweep"};
  const char* descs[] = {
      "solve the principal eigenproblem (lambda0, N, phi)",
      "run the (renormalized) time-dependent transport equation",
      "run the nonlinear proliferating/quiescent model",
      "check the model assumptions and kernel moments",
      "sweep one scalar config key over a list of values"};
  for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(names[i], descs[i]), opts);

  CLI11_PARSE(app, argc, argv);
  return dispatch(app.get_subcommands().front()->get_name(), opts);
}
