#include "fluxom/fit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "../json_detail.hpp"
#include "fluxom/circuit.hpp"
#include "fluxom/error.hpp"
#include "fluxom/fit/cavity.hpp"
#include "fluxom/fit/flux_arch.hpp"
#include "fluxom/fit/omit.hpp"
#include "fluxom/optomech.hpp"
#include "fluxom/squid.hpp"

namespace fluxom {

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(name);
  }
}

cplx bare_factor(double w, const CavityParams& p) {
  return 1.0 - std::polar(p.K, p.theta) / cplx(p.kappa, 2.0 * (w - p.omega0));
}

ComplexTrace ratio_trace(const ComplexTrace& a, const ComplexTrace& b, bool invert) {
  if (a.size() != b.size()) fail(Errc::grid_mismatch, "background traces have different lengths");
  std::vector<double> f;
  std::vector<cplx> v;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.frequency(i) - b.frequency(i)) > 1e-12 * a.frequency(i))
      fail(Errc::grid_mismatch, "background traces are not on the same grid");
    const cplx r = invert ? b.value(i) / a.value(i) : a.value(i) / b.value(i);
    // a full dip in the denominator leaves no usable ratio at that point
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag()) || std::abs(r) > 1e6) continue;
    f.push_back(a.frequency(i));
    v.push_back(r);
  }
  return ComplexTrace(std::move(f), std::move(v));
}

// Half-depth width of the |trace| dip at index i0 (rad/s); a full dip has
// |S21| = 1/2 at kappa/sqrt(12) from resonance.
double dip_kappa(const ComplexTrace& t, std::size_t i0) {
  std::vector<double> m(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) m[i] = std::abs(t.value(i));
  auto s = m;
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(s.size() / 2), s.end());
  const double level = 0.5 * (s[s.size() / 2] + m[i0]);
  std::size_t a = i0, b = i0;
  while (a > 0 && m[a - 1] < level) --a;
  while (b + 1 < m.size() && m[b + 1] < level) ++b;
  const double dw = (t.omega(t.size() - 1) - t.omega(0)) / static_cast<double>(t.size() - 1);
  return std::sqrt(3.0) * std::max(t.omega(b) - t.omega(a), 2.0 * dw);
}

// Cavity fit of `t` within +-half around w0 (rad/s).
CavityParams local_cavity(const ComplexTrace& t, double w0, double half) {
  const auto sub = t.slice(angular_to_hz(w0 - half), angular_to_hz(w0 + half));
  return CavityParams::from(fit_cavity_response(sub));
}

struct PairLocation {
  CavityParams lo, hi;
};

PairLocation locate_pair(const ComplexTrace& lo, const ComplexTrace& hi) {
  const auto rho = ratio_trace(lo, hi, false);
  const auto inv = ratio_trace(lo, hi, true);
  std::size_t imin = 0, imax = 0;
  for (std::size_t i = 1; i < rho.size(); ++i) {
    if (std::abs(rho.value(i)) < std::abs(rho.value(imin))) imin = i;
    if (std::abs(inv.value(i)) < std::abs(inv.value(imax))) imax = i;
  }
  if (imin == imax) fail(Errc::no_dip_found, "background pair shows no separate resonances");
  const double sep = std::abs(rho.omega(imax) - rho.omega(imin));
  auto half = [&](const ComplexTrace& t, std::size_t i) { return std::min(8.0 * dip_kappa(t, i), 0.5 * sep); };
  return {local_cavity(rho, rho.omega(imin), half(rho, imin)), local_cavity(inv, inv.omega(imax), half(inv, imax))};
}

std::optional<double> meta_number(const ComplexTrace& t, const char* key) { return t.meta_double(key); }

double refit_responsivity(const PipelineInputs& in, const BackgroundCoeffs& bg, const DeviceParams& dev,
                          double kappa) {
  const auto squid = dev.squid_at_field();
  std::vector<ComplexTrace> corrected;
  std::vector<double> currents;
  for (const auto& t : in.flux_sweep) {
    auto I = t.meta_double("bias_current_A");
    if (!I) fail(Errc::missing_metadata, "flux sweep trace lacks bias_current_A");
    // only the first sweep direction; a return leg sits on other branches
    if (currents.size() >= 2 && (*I - currents.back()) * (currents[1] - currents[0]) <= 0.0) break;
    currents.push_back(*I);
    corrected.push_back(correct_background(t, bg));
  }
  const auto f0 = sweep_resonances(corrected);
  const auto jumps = find_flux_jumps(currents, f0, angular_to_hz(kappa));
  if (jumps.size() < 2) fail(Errc::invalid_argument, "flux sweep shows fewer than two branch jumps");
  const bool up = currents.back() > currents.front();
  const double first = (up ? 1.0 : -1.0) * squid.switch_threshold * kPhi0;
  const auto cal = calibrate_flux_axis(jumps, first);

  std::vector<double> eff;
  FluxState st;
  st.phi_applied = cal.flux(currents.front());
  st = resolve_flux_branch(st.phi_applied, st, squid);
  for (double I : currents) {
    st = resolve_flux_branch(cal.flux(I), st, squid);
    eff.push_back(st.effective_flux());
  }
  const auto fit = fit_flux_arch(eff, f0, squid);
  std::optional<double> op = in.operating_flux_phi0;
  if (!op) op = in.omit.meta_double("flux_phi0");
  if (!op) fail(Errc::missing_metadata, "operating flux unknown (no flux_phi0 metadata)");
  return flux_responsivity(*op * kPhi0, arch_from(fit, squid));
}

}  // namespace

PipelineReport run_g0_pipeline(const PipelineInputs& in, const PipelineCalibration& cal, const DeviceParams& dev,
                               const PipelineOptions& opt) {
  require(opt.background_refinements >= 0, "background_refinements must be non-negative");
  require(opt.stitch_exclusion > 0.0 && opt.drive_cut_hz >= 0.0, "invalid pipeline options");
  PipelineReport rep;

  const double f_d = stage("drive_metadata", [&] {
    auto d = meta_number(in.omit, "drive_hz");
    if (!d) d = meta_number(in.cavity, "drive_hz");
    if (!d) fail(Errc::missing_metadata, "drive tone frequency (drive_hz) missing from trace metadata");
    return *d;
  });
  const double P_src = stage("drive_metadata", [&] {
    auto p = meta_number(in.omit, "p_source_dbm");
    if (!p) p = cal.P_source_dbm;
    if (!p) fail(Errc::missing_metadata, "drive power (p_source_dbm) missing from metadata and calibration");
    return *p;
  });
  rep.omega_d = hz_to_angular(f_d);

  // I. background
  auto pair = stage("locate_pair", [&] { return locate_pair(in.background_lo, in.background_hi); });
  double kappa_pair = 0.5 * (pair.lo.kappa + pair.hi.kappa);
  rep.background = stage("fit_background", [&] {
    auto st = stitch_background(in.background_lo, in.background_hi, pair.lo.omega0, pair.hi.omega0, kappa_pair,
                                opt.stitch_exclusion);
    return fit_background(st);
  });
  for (int k = 0; k < opt.background_refinements; ++k) {
    rep.background = stage("refine_background", [&] {
      const double sep = std::abs(pair.hi.omega0 - pair.lo.omega0);
      std::vector<ComplexTrace> cleaned;
      for (auto [raw, cav] : {std::pair{&in.background_lo, &pair.lo}, std::pair{&in.background_hi, &pair.hi}}) {
        const auto corr = correct_background(*raw, rep.background.coeffs);
        *cav = local_cavity(corr, cav->omega0, std::min(8.0 * cav->kappa, 0.5 * sep));
        std::vector<cplx> v(raw->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = raw->value(i) / bare_factor(raw->omega(i), *cav);
        cleaned.emplace_back(std::vector<double>(raw->frequency().begin(), raw->frequency().end()), std::move(v),
                             raw->meta());
      }
      kappa_pair = 0.5 * (pair.lo.kappa + pair.hi.kappa);
      auto st = stitch_background(cleaned[0], cleaned[1], pair.lo.omega0, pair.hi.omega0, kappa_pair,
                                  opt.stitch_exclusion);
      return fit_background(st);
    });
  }
  const auto& bg = rep.background.coeffs;

  // II. cavity
  rep.cavity_fit = stage("fit_cavity", [&] {
    const auto corr = correct_background(in.cavity, bg);
    std::vector<FrequencyWindow> cuts = {FrequencyWindow::around(f_d, opt.drive_cut_hz),
                                         {in.omit.frequency(0), in.omit.frequency(in.omit.size() - 1)}};
    return fit_cavity_response(corr, cuts);
  });
  const auto cav = CavityParams::from(rep.cavity_fit);
  rep.omega0 = cav.omega0;
  rep.kappa = cav.kappa;
  rep.K = cav.K;
  rep.theta = cav.theta;
  rep.d_c = cav.K / cav.kappa;

  // III-IV. transparency window
  rep.omit_fit = stage("fit_omit_window", [&] {
    return fit_omit_window(correct_background(in.omit, bg), rep.cavity_fit, rep.omega_d);
  });
  rep.Omega_m = rep.omit_fit.value("Omega_m");
  rep.Gamma_eff = rep.omit_fit.value("Gamma_eff");
  rep.delta_m = rep.omit_fit.value("delta_m");
  rep.d_m = rep.omit_fit.value("d_m");

  // V. photon number and coupling
  stage("coupling", [&] {
    const double P_in = chain_input_power(P_src, cal.G_chain_db);
    rep.P_in_dbm = watt_to_dbm(P_in);
    auto g0_of = [&](std::span<const double> x) {
      // x = omega0, kappa, K, Omega_m, Gamma_eff, D (= d_m / d_c)
      const double n_c =
          intracavity_photons(P_in, rep.omega_d, rep.omega_d - x[0], x[1], std::min(x[2], x[1]));
      const double delta_m = x[0] - rep.omega_d - x[3];
      return coupling_from_circles(x[5], 1.0, x[1], delta_m, x[4], n_c);
    };
    std::vector<double> x = {cav.omega0, cav.kappa, cav.K, rep.Omega_m, rep.Gamma_eff, rep.d_m / rep.d_c};
    const auto est = g0_of(x);
    rep.n_c = intracavity_photons(P_in, rep.omega_d, rep.omega_d - cav.omega0, cav.kappa, std::min(cav.K, cav.kappa));
    rep.C_eff = est.C_eff;
    rep.g = est.g;
    rep.g0 = est.g0;

    // first-order propagation; cavity and window fits treated as independent
    const auto& cf = rep.cavity_fit;
    const auto& of = rep.omit_fit;
    const double sD = of.sigma("d_m") / rep.d_c;
    double C[6][6] = {};
    const char* cn[3] = {"omega0", "kappa", "K"};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) C[a][b] = cf.cov(cn[a], cn[b]);
    C[3][3] = of.cov("Omega_m", "Omega_m");
    C[4][4] = of.cov("Gamma_eff", "Gamma_eff");
    C[3][4] = C[4][3] = of.cov("Omega_m", "Gamma_eff");
    C[5][5] = sD * sD;
    double grad[6];
    for (int j = 0; j < 6; ++j) {
      const double h = j == 0 || j == 3 ? 1e-4 * std::max(rep.Gamma_eff, 1e-6 * cav.kappa) : 1e-6 * std::abs(x[j]);
      auto xp = x, xm = x;
      xp[static_cast<std::size_t>(j)] += h;
      xm[static_cast<std::size_t>(j)] -= h;
      grad[j] = h > 0.0 ? (g0_of(xp).g0 - g0_of(xm).g0) / (2.0 * h) : 0.0;
    }
    double var = 0.0;
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) var += grad[a] * C[a][b] * grad[b];
    rep.sigma_g0_stat = std::sqrt(std::max(0.0, var));
    const double sys = opt.systematic * rep.g0;
    rep.sigma_g0 = std::sqrt(rep.sigma_g0_stat * rep.sigma_g0_stat + sys * sys);
    return 0;
  });

  if (!in.flux_sweep.empty())
    rep.refit_responsivity = stage("flux_arch", [&] { return refit_responsivity(in, bg, dev, rep.kappa); });

  rep.meta["background_refinements"] = std::to_string(opt.background_refinements);
  rep.meta["stitch_exclusion_kappa"] = format_double(opt.stitch_exclusion);
  rep.meta["drive_cut_hz"] = format_double(opt.drive_cut_hz);
  rep.meta["p_source_dbm"] = format_double(P_src);
  rep.meta["g_chain_db"] = format_double(cal.G_chain_db);
  return rep;
}

std::string report_to_json(const PipelineReport& r, bool include_fits) {
  using detail::json;
  json j;
  j["omega0_hz"] = angular_to_hz(r.omega0);
  j["kappa_hz"] = angular_to_hz(r.kappa);
  j["K_hz"] = angular_to_hz(r.K);
  j["theta_rad"] = r.theta;
  j["drive_hz"] = angular_to_hz(r.omega_d);
  j["Omega_m_hz"] = angular_to_hz(r.Omega_m);
  j["Gamma_eff_hz"] = angular_to_hz(r.Gamma_eff);
  j["delta_m_hz"] = angular_to_hz(r.delta_m);
  j["d_c"] = r.d_c;
  j["d_m"] = r.d_m;
  j["C_eff"] = r.C_eff;
  j["P_in_dbm"] = r.P_in_dbm;
  j["n_c"] = r.n_c;
  j["g_hz"] = angular_to_hz(r.g);
  j["g0_hz"] = angular_to_hz(r.g0);
  j["sigma_g0_hz"] = angular_to_hz(r.sigma_g0);
  j["sigma_g0_stat_hz"] = angular_to_hz(r.sigma_g0_stat);
  j["refit_responsivity_hz_per_phi0"] =
      r.refit_responsivity ? json(angular_to_hz(*r.refit_responsivity) * kPhi0) : json(nullptr);
  j["background"] = detail::background_to_json(r.background.coeffs);
  j["background"]["magnitude_rms_rel"] = r.background.magnitude_rms_rel;
  j["background"]["phase_rms_rad"] = r.background.phase_rms;
  j["background"]["n_cosines"] = r.background.n_cosines;
  if (include_fits) {
    j["fits"]["cavity"] = detail::fit_to_json(r.cavity_fit);
    j["fits"]["omit"] = detail::fit_to_json(r.omit_fit);
  }
  j["meta"] = r.meta;
  return j.dump(2);
}

}  // namespace fluxom
