#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "criteria.hpp"
#include "fluxom/error.hpp"
#include "fluxom/fit/cavity.hpp"
#include "fluxom/fit/pipeline.hpp"
#include "fluxom/fit/spectra.hpp"
#include "fluxom/mechanics.hpp"
#include "fluxom/squid.hpp"
#include "fluxom/synth.hpp"

namespace fluxom::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void emit(const fs::path& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream os(out);
  if (!os) fail(Errc::io_error, "cannot write " + out.string());
  os << text << '\n';
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
}

// Zero-padded so that a shell glob lists the files in sweep order.
std::string index_name(const char* stem, std::size_t i, std::size_t count) {
  const std::size_t width = std::max<std::size_t>(3, std::to_string(count > 0 ? count - 1 : 0).size());
  std::string n = std::to_string(i);
  if (n.size() < width) n.insert(0, width - n.size(), '0');
  return std::string(stem) + n + ".csv";
}

json truth_to_json(const OmitTruth& t) {
  return json{{"omega0_hz", angular_to_hz(t.omega0)},
              {"drive_hz", angular_to_hz(t.omega_d)},
              {"kappa_hz", angular_to_hz(t.kappa)},
              {"K_hz", angular_to_hz(t.K)},
              {"theta_rad", t.theta},
              {"Omega_m_hz", angular_to_hz(t.Omega_m)},
              {"Gamma_eff_hz", angular_to_hz(t.Gamma_eff)},
              {"delta_m_hz", angular_to_hz(t.delta_m)},
              {"responsivity_hz_per_phi0", angular_to_hz(t.responsivity) * kPhi0},
              {"x_zpf_m", t.x_zpf},
              {"P_in_dbm", watt_to_dbm(t.P_in)},
              {"n_c", t.n_c},
              {"g0_hz", angular_to_hz(t.g0)},
              {"g_hz", angular_to_hz(t.g)},
              {"d_c", t.d_c},
              {"d_m", t.d_m}};
}

FrequencyWindow parse_cut(const std::string& s) {
  const auto colon = s.find(':');
  auto number = [&](std::string_view v) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size()) fail(Errc::invalid_argument, "bad cut '" + s + "'");
    return x;
  };
  if (colon == std::string::npos) fail(Errc::invalid_argument, "cut must be lo:hi in Hz, got '" + s + "'");
  const std::string_view v(s);
  FrequencyWindow w{number(v.substr(0, colon)), number(v.substr(colon + 1))};
  if (!(w.hi_hz > w.lo_hz)) fail(Errc::invalid_argument, "cut needs hi > lo: '" + s + "'");
  return w;
}

struct SweepRow {
  double setpoint = 0.0;
  double responsivity = NAN;  // Hz per Phi0
  double g0_true = NAN, g0_recovered = NAN, sigma = NAN;
  double stiffening = NAN, stiffening_scaled = NAN;  // Hz
  std::string status = "ok";
  int code = ok;
};

SweepRow sweep_point(const SweepArgs& a, const Config& cfg, double setpoint, std::size_t index) {
  SweepRow row;
  row.setpoint = setpoint;
  try {
    DeviceParams dev = cfg.device;
    double flux = 0.0;
    if (a.axis == "flux") {
      dev.b_parallel = a.b_parallel.value_or(cfg.device.b_parallel);
      flux = setpoint;
    } else {
      dev.b_parallel = setpoint;
      if (a.flux_phi0) {
        flux = *a.flux_phi0;
      } else {
        const auto phi = flux_for_responsivity(kTwoPi * 60e6 / kPhi0, dev.squid_at_field());
        if (!phi) fail(Errc::invalid_argument, "60 MHz/Phi0 is not reachable; pass --flux");
        flux = *phi / kPhi0;
      }
    }
    dev.validate();
    const auto squid = dev.squid_at_field();
    const double phi = flux * kPhi0;
    row.responsivity = angular_to_hz(flux_responsivity(phi, squid)) * kPhi0;
    const double LJ = junction_inductance_at(phi, squid);
    DeviceParams bare = dev;
    bare.mech.stiffening_scale = 1.0;
    row.stiffening = angular_to_hz(stiffening_shift(bare, LJ));
    bare.mech.stiffening_scale = a.stiffening_scale;
    row.stiffening_scaled = angular_to_hz(stiffening_shift(bare, LJ));

    OmitScenario sc;
    sc.flux_phi0 = flux;
    sc.p_source_dbm = cfg.calibration.P_source_dbm;
    sc.g_chain_db = cfg.calibration.G_pump_db;
    const auto grid = linear_grid(5.10e9, 5.28e9, 1201);
    const BackgroundCoeffs bg =
        a.ripple_db > 0.0 ? ripple_background(grid.front(), grid.back(), a.ripple_db, 60e6) : BackgroundCoeffs{};
    const auto set = synthesize_omit_set(sc, dev, bg, {a.seed + 10 * index, a.sigma}, grid);
    row.g0_true = angular_to_hz(set.truth.g0);

    const auto r = run_g0_pipeline({set.background_lo, set.background_hi, set.cavity, set.omit, {}, {}},
                                   {cfg.calibration.P_source_dbm, cfg.calibration.G_pump_db}, dev);
    row.g0_recovered = angular_to_hz(r.g0);
    row.sigma = angular_to_hz(r.sigma_g0);
  } catch (const Error& e) {
    row.status = std::string(to_string(e.code()));
    row.code = e.is_convergence_failure() ? convergence_failure : input_error;
  }
  return row;
}

}  // namespace

int simulate(const SimulateArgs& a, const Config& cfg) {
  Scenario s = parse_scenario(a.scenario);
  if (a.seed) s.noise.seed = *a.seed;
  if (a.sigma) s.noise.sigma = *a.sigma;
  ensure_dir(a.out_dir);
  const BackgroundCoeffs bg = s.background.value_or(BackgroundCoeffs{});

  std::vector<std::pair<std::string, const ComplexTrace*>> files;
  std::vector<ComplexTrace> traces;
  std::optional<OmitSet> set;
  if (s.kind == ScenarioKind::omit) {
    set = synthesize_omit_set(s.omit, cfg.device, bg, s.noise, s.grid.frequencies());
    files = {{"background_lo.csv", &set->background_lo},
             {"background_hi.csv", &set->background_hi},
             {"cavity.csv", &set->cavity},
             {"omit.csv", &set->omit}};
  } else {
    traces = synthesize(s, cfg.device, bg, s.noise, s.grid.frequencies());
    const bool many = s.kind == ScenarioKind::flux_sweep;
    for (std::size_t i = 0; i < traces.size(); ++i)
      files.emplace_back(many ? index_name("sweep_", i, traces.size()) : std::string("trace.csv"), &traces[i]);
  }
  for (const auto& [name, t] : files) {
    write_trace_csv(a.out_dir / name, *t);
    std::cout << (a.out_dir / name).string() << '\n';
  }
  if (set) {
    emit(a.out_dir / "truth.json", truth_to_json(set->truth).dump(2));
    std::cout << (a.out_dir / "truth.json").string() << '\n';
  }
  return ok;
}

int fit(const FitArgs& a, const Config&) {
  const auto trace = read_trace_csv(a.trace);
  FitResult r;
  if (a.model == "cavity") {
    std::vector<FrequencyWindow> cuts;
    for (const auto& c : a.cuts) cuts.push_back(parse_cut(c));
    r = fit_cavity_response(trace, cuts);
  } else if (a.model == "thermal_psd") {
    r = fit_thermal_psd(trace);
  } else if (a.model == "driven_sideband") {
    r = fit_driven_sideband(trace);
  } else {
    fail(Errc::invalid_argument, "unknown model '" + a.model + "'");
  }
  json j = json::parse(fit_result_to_json(r));
  j["model"] = a.model;
  j["source"] = a.trace.filename().string();
  emit(a.out, j.dump(2));
  return r.converged ? ok : convergence_failure;
}

int pipeline(const PipelineArgs& a, const Config& cfg) {
  auto pick = [&](const fs::path& given, const char* name) {
    if (!given.empty()) return given;
    if (a.dir.empty()) fail(Errc::invalid_argument, std::string("need --dir or --") + name);
    std::string file(name);
    std::replace(file.begin(), file.end(), '-', '_');
    return a.dir / (file + ".csv");
  };
  PipelineInputs in{read_trace_csv(pick(a.background_lo, "background-lo")),
                    read_trace_csv(pick(a.background_hi, "background-hi")),
                    read_trace_csv(pick(a.cavity, "cavity")),
                    read_trace_csv(pick(a.omit, "omit")),
                    {},
                    a.flux_phi0};
  for (const auto& p : a.flux_sweep) in.flux_sweep.push_back(read_trace_csv(p));
  PipelineOptions opt;
  opt.background_refinements = a.refinements;
  const auto r = run_g0_pipeline(in, {cfg.calibration.P_source_dbm, cfg.calibration.G_pump_db}, cfg.device, opt);
  emit(a.out, report_to_json(r, a.include_fits));
  return ok;
}

int sweep(const SweepArgs& a, const Config& cfg) {
  if (a.axis != "flux" && a.axis != "b_parallel")
    fail(Errc::invalid_argument, "--axis must be flux or b_parallel");
  if (a.steps < 1) fail(Errc::invalid_argument, "--steps must be at least 1");
  if (a.steps > 1 && !(a.to != a.from)) fail(Errc::invalid_argument, "--from and --to must differ");
  if (!(a.sigma >= 0.0)) fail(Errc::invalid_argument, "--sigma must be non-negative");

  std::vector<double> points;
  for (int k = 0; k < a.steps; ++k)
    points.push_back(a.steps == 1 ? a.from : (a.from * (a.steps - 1 - k) + a.to * k) / (a.steps - 1));

  std::size_t jobs = a.jobs > 0 ? static_cast<std::size_t>(a.jobs) : std::thread::hardware_concurrency();
  jobs = std::max<std::size_t>(1, jobs);
  std::vector<SweepRow> rows(points.size());
  for (std::size_t start = 0; start < points.size(); start += jobs) {
    std::vector<std::future<SweepRow>> batch;
    for (std::size_t i = start; i < std::min(points.size(), start + jobs); ++i)
      batch.push_back(std::async(std::launch::async, sweep_point, std::cref(a), std::cref(cfg), points[i], i));
    for (std::size_t i = 0; i < batch.size(); ++i) rows[start + i] = batch[i].get();
  }

  std::ostringstream os;
  os << "setpoint,responsivity_hz_per_phi0,g0_true_hz,g0_recovered_hz,sigma_hz,dOmega_m_hz,dOmega_m_scaled_hz,status\n";
  int status = ok;
  for (const auto& r : rows) {
    os << format_double(r.setpoint) << ',' << format_double(r.responsivity) << ',' << format_double(r.g0_true) << ','
       << format_double(r.g0_recovered) << ',' << format_double(r.sigma) << ',' << format_double(r.stiffening) << ','
       << format_double(r.stiffening_scaled) << ',' << r.status << '\n';
    status = std::max(status, r.code);
    if (r.code != ok) std::cerr << "setpoint " << format_double(r.setpoint) << ": " << r.status << '\n';
  }
  std::string text = os.str();
  text.pop_back();
  emit(a.out, text);
  return status;
}

int selftest(const SelftestArgs& a, const Config& cfg) {
  std::vector<int> ids = a.criteria;
  if (ids.empty())
    for (int i = 1; i <= acceptance::kCriteriaCount; ++i) ids.push_back(i);
  int failed = 0;
  for (int id : ids) {
    if (id < 1 || id > acceptance::kCriteriaCount) fail(Errc::invalid_argument, "no criterion " + std::to_string(id));
    const auto o = acceptance::run_criterion(id, cfg);
    std::cout << acceptance::format(o, !a.brief) << std::flush;
    failed += o.pass() ? 0 : 1;
  }
  std::cout << (failed ? "FAILED " : "all passed ") << ids.size() - failed << '/' << ids.size() << '\n';
  return failed ? input_error : ok;
}

}  // namespace fluxom::cli
