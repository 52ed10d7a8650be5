#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "criteria.hpp"
#include "fluxom/error.hpp"

int main(int argc, char** argv) {
  using namespace fluxom;
  using namespace fluxom::cli;

  CLI::App app{"fluxom: flux-mediated optomechanics models, synthetic data and g0 extraction"};
  app.require_subcommand(1);
  std::string config_path;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "device/calibration JSON (default: bundled paper_device.json)");
  app.add_flag("-q,--quiet", quiet, "suppress warnings");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "write synthetic traces for a scenario");
  s->add_option("-s,--scenario", sim.scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
  s->add_option("-o,--out", sim.out_dir, "output directory")->required();
  s->add_option("--seed", sim.seed, "override noise.seed");
  s->add_option("--sigma", sim.sigma, "override noise.sigma");

  FitArgs fa;
  auto* f = app.add_subcommand("fit", "fit one trace and write the parameters as JSON");
  f->add_option("-t,--trace", fa.trace, "trace CSV")->required()->check(CLI::ExistingFile);
  f->add_option("-m,--model", fa.model, "cavity | thermal_psd | driven_sideband")
      ->check(CLI::IsMember({"cavity", "thermal_psd", "driven_sideband"}));
  f->add_option("--cut", fa.cuts, "lo:hi window in Hz to exclude (cavity model, repeatable)");
  f->add_option("-o,--out", fa.out, "output JSON (default stdout)");

  PipelineArgs pa;
  auto* p = app.add_subcommand("pipeline", "extract g0 from a background pair, cavity and OMIT trace");
  p->add_option("-d,--dir", pa.dir, "directory with background_lo/hi.csv, cavity.csv, omit.csv");
  p->add_option("--background-lo", pa.background_lo)->check(CLI::ExistingFile);
  p->add_option("--background-hi", pa.background_hi)->check(CLI::ExistingFile);
  p->add_option("--cavity", pa.cavity)->check(CLI::ExistingFile);
  p->add_option("--omit", pa.omit)->check(CLI::ExistingFile);
  p->add_option("--flux-sweep", pa.flux_sweep, "flux sweep traces for the arch refit")->check(CLI::ExistingFile);
  p->add_option("--flux", pa.flux_phi0, "operating flux in Phi0 (else omit metadata)");
  p->add_option("--refinements", pa.refinements, "background refinement rounds")->check(CLI::Range(0, 10));
  p->add_flag("--no-fits", [&](std::int64_t) { pa.include_fits = false; }, "omit raw fit results");
  p->add_option("-o,--out", pa.out, "output JSON (default stdout)");

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "g0 and stiffening over flux or in-plane field");
  w->add_option("--axis", sw.axis, "flux (Phi0) | b_parallel (T)")->required()->check(CLI::IsMember({"flux", "b_parallel"}));
  w->add_option("--from", sw.from)->required();
  w->add_option("--to", sw.to)->required();
  w->add_option("--steps", sw.steps)->required();
  w->add_option("--flux", sw.flux_phi0, "fixed flux for the b_parallel axis (default: 60 MHz/Phi0 point)");
  w->add_option("--b-parallel", sw.b_parallel, "fixed field in T for the flux axis (default: config)");
  w->add_option("--sigma", sw.sigma, "noise per quadrature (default 0)");
  w->add_option("--seed", sw.seed, "base seed; setpoint k uses seed + 10k");
  w->add_option("--ripple-db", sw.ripple_db, "background ripple in dB (default flat)");
  w->add_option("--stiffening-scale", sw.stiffening_scale, "scale for the second stiffening column")->capture_default_str();
  w->add_option("-j,--jobs", sw.jobs, "parallel setpoints (default: hardware threads)");
  w->add_option("-o,--out", sw.out, "output CSV (default stdout)");

  SelftestArgs st;
  auto* t = app.add_subcommand("selftest", "run the acceptance criteria");
  t->add_option("--criteria", st.criteria, "criterion numbers (default: all)");
  t->add_flag("--brief", st.brief, "one line per criterion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : input_error;
  }

  if (quiet) set_warning_handler({});
  try {
    Config cfg;
    if (!config_path.empty()) {
      cfg = parse_config(config_path);
    } else if (std::filesystem::exists(acceptance::bundled_config_path())) {
      cfg = parse_config(acceptance::bundled_config_path());
    }
    cfg.device.validate();
    if (*s) return simulate(sim, cfg);
    if (*f) return fit(fa, cfg);
    if (*p) return pipeline(pa, cfg);
    if (*w) return sweep(sw, cfg);
    if (*t) return selftest(st, cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_convergence_failure() ? convergence_failure : input_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return input_error;
  }
  return input_error;
}
