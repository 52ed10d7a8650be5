#include "fluxom/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fluxom/circuit.hpp"
#include "fluxom/error.hpp"

namespace fluxom {

double BackgroundCoeffs::magnitude(double omega) const {
  const double t = normalized(omega);
  double p = 0.0;
  for (double c : poly) p = p * t + c;
  p += cos1[0] * std::cos(cos1[1] * t + cos1[2]);
  p += cos2[0] * std::cos(cos2[1] * t + cos2[2]);
  return p;
}

double BackgroundCoeffs::phase_at(double omega) const { return phase[0] * normalized(omega) + phase[1]; }

void BackgroundCoeffs::validate_on(std::span<const double> grid_hz) const {
  require(omega_scale != 0.0 && std::isfinite(omega_scale), "background omega_scale must be non-zero");
  for (double f : grid_hz) {
    const double m = magnitude(kTwoPi * f);
    if (!(m > 0.0) || !std::isfinite(m))
      fail(Errc::validation_error, "background magnitude is not positive at " + format_double(f) + " Hz");
  }
}

cplx background_eval(double omega, const BackgroundCoeffs& b) {
  return std::polar(b.magnitude(omega), b.phase_at(omega));
}

double ripple_amplitude_for_db(double db) {
  require(db >= 0.0, "ripple must be non-negative");
  const double r = std::pow(10.0, db / 20.0);
  return (r - 1.0) / (r + 1.0);
}

double ripple_db_for_amplitude(double amplitude) {
  require(amplitude >= 0.0 && amplitude < 1.0, "ripple amplitude must lie in [0, 1)");
  return 20.0 * std::log10((1.0 + amplitude) / (1.0 - amplitude));
}

BackgroundCoeffs ripple_background(double f_lo_hz, double f_hi_hz, double ripple_db, double period_hz, double delay_s,
                                   double level) {
  require(f_hi_hz > f_lo_hz, "background window must be ascending");
  require(period_hz > 0.0 && level > 0.0, "ripple period and level must be positive");
  BackgroundCoeffs b;
  const double half_hz = 0.5 * (f_hi_hz - f_lo_hz);
  b.omega_ref = kTwoPi * 0.5 * (f_lo_hz + f_hi_hz);
  b.omega_scale = kTwoPi * half_hz;
  b.poly = {0.0, 0.0, 0.0, -0.04 * level, 0.03 * level, level};
  b.cos1 = {ripple_amplitude_for_db(ripple_db) * level, kTwoPi * half_hz / period_hz, 0.4};
  b.cos2 = {0.0, 0.0, 0.0};
  b.phase = {-delay_s * b.omega_scale, std::remainder(-delay_s * b.omega_ref, kTwoPi)};
  return b;
}

std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::cavity: return "cavity";
    case ScenarioKind::flux_sweep: return "flux_sweep";
    case ScenarioKind::omit: return "omit";
    case ScenarioKind::thermal_psd: return "thermal_psd";
    case ScenarioKind::driven_sideband: return "driven_sideband";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(std::string_view s) {
  for (auto k : {ScenarioKind::cavity, ScenarioKind::flux_sweep, ScenarioKind::omit, ScenarioKind::thermal_psd,
                 ScenarioKind::driven_sideband})
    if (to_string(k) == s) return k;
  fail(Errc::validation_error, "unknown scenario kind '" + std::string(s) + "'");
}

void add_noise(std::vector<cplx>& values, const NoiseSpec& n, bool real_only) {
  require(n.sigma >= 0.0 && std::isfinite(n.sigma), "noise sigma must be non-negative");
  if (n.sigma == 0.0) return;
  std::mt19937_64 rng(n.seed);
  std::normal_distribution<double> gauss(0.0, n.sigma);
  for (auto& v : values) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v += real_only ? cplx(re, 0.0) : cplx(re, im);
  }
}

namespace {

double mechanical_frequency_at(double flux_phi0, const DeviceParams& dev) {
  const auto squid = dev.squid_at_field();
  return stiffened_frequency(dev, junction_inductance_at(flux_phi0 * kPhi0, squid));
}

ComplexTrace finish(std::span<const double> grid_hz, std::vector<cplx> v, const NoiseSpec& n, Metadata meta,
                    bool real_only = false) {
  add_noise(v, n, real_only);
  meta["noise_seed"] = std::to_string(n.seed);
  meta["noise_sigma"] = format_double(n.sigma);
  return ComplexTrace(std::vector<double>(grid_hz.begin(), grid_hz.end()), std::move(v), std::move(meta));
}

std::vector<cplx> bare_cavity_values(std::span<const double> grid_hz, const BackgroundCoeffs& b, double omega0,
                                     double kappa, double K, double theta) {
  std::vector<cplx> v(grid_hz.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = kTwoPi * grid_hz[i];
    v[i] = background_eval(w, b) * bare_cavity_response(w, omega0, kappa, K, theta);
  }
  return v;
}

Metadata cavity_meta(const char* kind, double omega0, double kappa, double K, double theta) {
  Metadata m;
  m["kind"] = kind;
  m["f0_hz"] = format_double(angular_to_hz(omega0));
  m["kappa_hz"] = format_double(angular_to_hz(kappa));
  m["K_hz"] = format_double(angular_to_hz(K));
  m["theta_rad"] = format_double(theta);
  return m;
}

ComplexTrace synth_cavity(const CavityScenario& s, const DeviceParams& dev, const BackgroundCoeffs& b,
                          const NoiseSpec& n, std::span<const double> grid) {
  require(s.kappa_hz > 0.0 && s.K_over_kappa > 0.0, "cavity scenario needs kappa_hz > 0 and K_over_kappa > 0");
  const double omega0 = s.f0_hz ? hz_to_angular(*s.f0_hz) : arch_frequency(s.flux_phi0 * kPhi0, dev.squid_at_field());
  const double kappa = hz_to_angular(s.kappa_hz);
  const double K = s.K_over_kappa * kappa;
  auto meta = cavity_meta("cavity", omega0, kappa, K, s.theta);
  meta["flux_phi0"] = format_double(s.flux_phi0);
  return finish(grid, bare_cavity_values(grid, b, omega0, kappa, K, s.theta), n, std::move(meta));
}

std::vector<ComplexTrace> synth_flux_sweep(const FluxSweepScenario& s, const DeviceParams& dev,
                                           const BackgroundCoeffs& b, const NoiseSpec& n,
                                           std::span<const double> grid) {
  require(!s.bias_currents_A.empty(), "flux_sweep scenario needs bias currents");
  require(s.kappa_hz > 0.0 && s.K_over_kappa > 0.0, "flux_sweep scenario needs kappa_hz > 0 and K_over_kappa > 0");
  require(s.calibration.current_to_flux != 0.0, "flux calibration slope must be non-zero");
  const auto squid = dev.squid_at_field();
  const double kappa = hz_to_angular(s.kappa_hz);
  const double K = s.K_over_kappa * kappa;

  std::vector<ComplexTrace> out;
  out.reserve(s.bias_currents_A.size());
  FluxState state;
  state.phi_applied = s.calibration.flux(s.bias_currents_A.front());
  state = resolve_flux_branch(state.phi_applied, state, squid);
  for (std::size_t k = 0; k < s.bias_currents_A.size(); ++k) {
    const double I = s.bias_currents_A[k];
    state = resolve_flux_branch(s.calibration.flux(I), state, squid);
    const double omega0 = arch_frequency(state.effective_flux(), squid);
    auto meta = cavity_meta("flux_sweep", omega0, kappa, K, s.theta);
    meta["bias_current_A"] = format_double(I);
    meta["phi_applied_phi0"] = format_double(state.phi_applied / kPhi0);
    meta["branch"] = std::to_string(state.branch);
    meta["direction"] = state.direction == SweepDirection::up ? "up" : "down";
    NoiseSpec nk{n.seed + k, n.sigma};
    out.push_back(finish(grid, bare_cavity_values(grid, b, omega0, kappa, K, s.theta), nk, std::move(meta)));
  }
  return out;
}

Metadata omit_meta(const char* kind, const OmitTruth& t, const OmitScenario& s) {
  Metadata m = cavity_meta(kind, t.omega0, t.kappa, t.K, t.theta);
  m["drive_hz"] = format_double(angular_to_hz(t.omega_d));
  m["p_source_dbm"] = format_double(s.p_source_dbm);
  m["g_chain_db"] = format_double(s.g_chain_db);
  m["flux_phi0"] = format_double(s.flux_phi0);
  return m;
}

ComplexTrace synth_omit_trace(const OmitTruth& t, const OmitScenario& s, const DeviceParams& dev,
                              const BackgroundCoeffs& b, const NoiseSpec& n, std::span<const double> grid,
                              bool with_leak) {
  const auto model = omit_model(t, dev);
  std::vector<cplx> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = kTwoPi * grid[i];
    const cplx bg = background_eval(w, b);
    const bool leaked = with_leak && std::abs(grid[i] - angular_to_hz(t.omega_d)) <= s.leak_halfwidth_hz;
    v[i] = leaked ? s.leak_factor * bg : bg * omit_response(w, model);
  }
  return finish(grid, std::move(v), n, omit_meta(with_leak ? "omit_cavity" : "omit", t, s));
}

ComplexTrace synth_thermal(const ThermalPsdScenario& s, const DeviceParams& dev, const NoiseSpec& n,
                           std::span<const double> grid) {
  require(s.floor > 0.0 && s.peak_over_floor >= 0.0, "thermal_psd needs floor > 0 and peak_over_floor >= 0");
  const double Om = mechanical_frequency_at(s.flux_phi0, dev);
  const double hw = 0.5 * dev.mech.Gamma_m;
  std::vector<cplx> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = kTwoPi * grid[i] - Om;
    v[i] = s.floor * (1.0 + s.peak_over_floor * hw * hw / (d * d + hw * hw));
  }
  Metadata meta;
  meta["kind"] = "thermal_psd";
  meta["f_m_hz"] = format_double(angular_to_hz(Om));
  meta["gamma_m_hz"] = format_double(angular_to_hz(dev.mech.Gamma_m));
  return finish(grid, std::move(v), n, std::move(meta), true);
}

ComplexTrace synth_sideband(const DrivenSidebandScenario& s, const DeviceParams& dev, const NoiseSpec& n,
                            std::span<const double> grid) {
  require(s.force_N > 0.0 && s.parasitic_rel >= 0.0, "driven_sideband needs force_N > 0 and parasitic_rel >= 0");
  const double Om = mechanical_frequency_at(s.flux_phi0, dev);
  const double tr = sideband_transduction(dev, Om);
  require(tr > 0.0, "driven_sideband needs a non-zero in-plane field");
  // normalized so the motional peak has unit magnitude
  const double peak = tr * s.force_N / (0.5 * dev.mech.Gamma_m);
  const ParasiticSideband par{s.parasitic_rel * peak, s.parasitic_phase};
  std::vector<cplx> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = upconverted_sideband(kTwoPi * grid[i], s.force_N, dev.mech, Om, tr, par) / peak;
  Metadata meta;
  meta["kind"] = "driven_sideband";
  meta["f_m_hz"] = format_double(angular_to_hz(Om));
  meta["gamma_m_hz"] = format_double(angular_to_hz(dev.mech.Gamma_m));
  return finish(grid, std::move(v), n, std::move(meta));
}

}  // namespace

OmitTruth omit_truth(const OmitScenario& s, const DeviceParams& dev) {
  require(s.kappa_hz > 0.0 && s.K_over_kappa > 0.0, "omit scenario needs kappa_hz > 0 and K_over_kappa > 0");
  const auto squid = dev.squid_at_field();
  const double phi = s.flux_phi0 * kPhi0;
  OmitTruth t;
  t.omega0 = arch_frequency(phi, squid);
  t.responsivity = flux_responsivity(phi, squid);
  t.Omega_m = stiffened_frequency(dev, junction_inductance_at(phi, squid));
  t.x_zpf = zero_point_motion(dev.mech.mass, t.Omega_m);
  t.g0 = s.g0_hz ? hz_to_angular(*s.g0_hz) : single_photon_coupling(t.responsivity, dev, t.x_zpf);
  t.kappa = hz_to_angular(s.kappa_hz);
  t.K = s.K_over_kappa * t.kappa;
  t.theta = s.theta;
  t.delta_m = hz_to_angular(s.delta_m_hz);
  t.omega_d = t.omega0 - t.Omega_m - t.delta_m;
  t.P_in = chain_input_power(s.p_source_dbm, s.g_chain_db);
  t.n_c = intracavity_photons(t.P_in, t.omega_d, t.omega_d - t.omega0, t.kappa, std::min(t.K, t.kappa));
  t.g = t.g0 * std::sqrt(t.n_c);
  t.Gamma_eff = dev.mech.Gamma_m + spring_and_damping(t.omega_d - t.omega0, t.Omega_m, t.kappa, t.g).Gamma_o;
  const auto d = circle_diameters(t.K, t.kappa, t.g, t.Gamma_eff, t.delta_m);
  t.d_c = d.d_c;
  t.d_m = d.d_m;
  return t;
}

OmitModel omit_model(const OmitTruth& t, const DeviceParams& dev) {
  OmitModel m;
  m.kappa = t.kappa;
  m.K = t.K;
  m.theta = t.theta;
  m.omega0 = t.omega0;
  m.omega_d = t.omega_d;
  m.g = t.g;
  m.mech = dev.mech;
  m.Omega_m = t.Omega_m;
  return m;
}

OmitSet synthesize_omit_set(const OmitScenario& s, const DeviceParams& dev, const BackgroundCoeffs& b,
                            const NoiseSpec& n, std::span<const double> wide_grid_hz) {
  require(s.omit_points >= 3 && s.omit_halfspan_hz > 0.0, "omit window needs >= 3 points and a positive span");
  b.validate_on(wide_grid_hz);
  const auto t = omit_truth(s, dev);
  if (t.g > 0.1 * t.kappa) warn("g exceeds kappa/10; weak-coupling forms are unreliable");

  CavityScenario pair{std::nullopt, 0.0, s.kappa_hz, s.K_over_kappa, s.theta};
  pair.f0_hz = s.f0_lo_hz;
  auto lo = synth_cavity(pair, dev, b, {n.seed, n.sigma}, wide_grid_hz);
  pair.f0_hz = s.f0_hi_hz;
  auto hi = synth_cavity(pair, dev, b, {n.seed + 1, n.sigma}, wide_grid_hz);
  lo.set_meta("kind", "background_lo");
  hi.set_meta("kind", "background_hi");

  auto cav = synth_omit_trace(t, s, dev, b, {n.seed + 2, n.sigma}, wide_grid_hz, true);

  const double fc = angular_to_hz(t.omega_d + t.Omega_m);
  const auto narrow = linear_grid(fc - s.omit_halfspan_hz, fc + s.omit_halfspan_hz, s.omit_points);
  b.validate_on(narrow);
  auto om = synth_omit_trace(t, s, dev, b, {n.seed + 3, n.sigma}, narrow, false);
  return {std::move(lo), std::move(hi), std::move(cav), std::move(om), t};
}

std::vector<ComplexTrace> synthesize(const Scenario& s, const DeviceParams& dev, const BackgroundCoeffs& b,
                                     const NoiseSpec& n, std::span<const double> grid) {
  dev.validate();
  require(grid.size() >= 2, "grid needs at least two points");
  switch (s.kind) {
    case ScenarioKind::cavity:
      b.validate_on(grid);
      return {synth_cavity(s.cavity, dev, b, n, grid)};
    case ScenarioKind::flux_sweep:
      b.validate_on(grid);
      return synth_flux_sweep(s.flux_sweep, dev, b, n, grid);
    case ScenarioKind::omit: {
      b.validate_on(grid);
      const auto t = omit_truth(s.omit, dev);
      return {synth_omit_trace(t, s.omit, dev, b, n, grid, false)};
    }
    case ScenarioKind::thermal_psd:
      return {synth_thermal(s.thermal, dev, n, grid)};
    case ScenarioKind::driven_sideband:
      return {synth_sideband(s.sideband, dev, n, grid)};
  }
  fail(Errc::invalid_argument, "unhandled scenario kind");
}

std::vector<ComplexTrace> synthesize(const Scenario& s, const DeviceParams& dev) {
  const auto grid = s.grid.frequencies();
  return synthesize(s, dev, s.background.value_or(BackgroundCoeffs{}), s.noise, grid);
}

}  // namespace fluxom
