#include "fluxom/optomech.hpp"

#include <cmath>
#include <string>

#include "fluxom/error.hpp"
#include "fluxom/mechanics.hpp"

namespace fluxom {

namespace {

constexpr cplx I(0.0, 1.0);

void check_kappa(double kappa) { require(kappa > 0.0 && std::isfinite(kappa), "kappa must be positive"); }

}  // namespace

double single_photon_coupling(double responsivity, const DeviceParams& dev, double x_zpf) {
  require(responsivity >= 0.0 && x_zpf >= 0.0, "g0 needs non-negative responsivity and x_zpf");
  return responsivity * flux_per_displacement(dev) * x_zpf;
}

CouplingPoint coupling_point(double responsivity, const DeviceParams& dev, double x_zpf, double n_c) {
  require(n_c >= 0.0, "photon number must be non-negative");
  CouplingPoint c;
  c.responsivity = responsivity;
  c.G_pull = responsivity * flux_per_displacement(dev);
  c.g0 = single_photon_coupling(responsivity, dev, x_zpf);
  c.n_c = n_c;
  c.g = c.g0 * std::sqrt(n_c);
  return c;
}

FieldAmplitudes steady_state_field(double P_in, double omega_d, double Delta, double kappa, double kappa_e) {
  check_kappa(kappa);
  require(P_in >= 0.0 && omega_d > 0.0, "drive needs P_in >= 0 and omega_d > 0");
  require(kappa_e > 0.0 && kappa_e <= kappa, "kappa_e must lie in (0, kappa]");
  FieldAmplitudes f;
  f.S_in = std::sqrt(P_in / (kHbar * omega_d));
  f.alpha_bar = std::sqrt(0.5 * kappa_e) * f.S_in / cplx(0.5 * kappa, -Delta);
  return f;
}

cplx cavity_susceptibility(double Omega, double Delta, double kappa) {
  check_kappa(kappa);
  return 1.0 / cplx(0.5 * kappa, -(Delta + Omega));
}

Susceptibilities susceptibilities(double Omega, double Delta, double kappa, double g, const MechParams& p,
                                  double Omega_m) {
  check_kappa(kappa);
  require(Omega_m > 0.0, "mechanical frequency must be positive");
  Susceptibilities s;
  s.chi_c = cavity_susceptibility(Omega, Delta, kappa);
  s.Sigma = -I * g * g * (cavity_susceptibility(Omega_m, Delta, kappa) - std::conj(cavity_susceptibility(-Omega_m, Delta, kappa)));
  s.chi_m_eff = 1.0 / (2.0 * p.mass * Omega_m) / (cplx(Omega_m - Omega, -0.5 * p.Gamma_m) + s.Sigma);
  return s;
}

SpringDamping spring_and_damping(double Delta, double Omega_m, double kappa, double g) {
  check_kappa(kappa);
  const double q = 0.25 * kappa * kappa;
  const double up = Delta + Omega_m;
  const double dn = Delta - Omega_m;
  SpringDamping r;
  r.dOmega_m = g * g * (up / (q + up * up) + dn / (q + dn * dn));
  r.Gamma_o = g * g * kappa * (1.0 / (q + up * up) - 1.0 / (q + dn * dn));
  return r;
}

cplx bare_cavity_response(double omega, double omega0, double kappa, double K, double theta) {
  return 1.0 - std::polar(K, theta) / cplx(kappa, 2.0 * (omega - omega0));
}

cplx omit_response(double omega, const OmitModel& m) {
  const double Delta = m.omega_d - m.omega0;
  const double Omega = omega - m.omega_d;
  const auto s = susceptibilities(Omega, Delta, m.kappa, m.g, m.mech, m.Omega_m);
  const cplx bracket = 1.0 + I * 2.0 * m.mech.mass * m.Omega_m * m.g * m.g * s.chi_c * s.chi_m_eff;
  return 1.0 - std::polar(m.K, m.theta) / cplx(m.kappa, 2.0 * (Delta + Omega)) * bracket;
}

ComplexTrace omit_response_trace(std::span<const double> grid_hz, const OmitModel& m) {
  check_kappa(m.kappa);
  if (m.g > 0.1 * m.kappa)
    warn("g = " + std::to_string(m.g / kTwoPi) + " Hz exceeds kappa/10; weak-coupling forms are unreliable");
  std::vector<double> f(grid_hz.begin(), grid_hz.end());
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = omit_response(kTwoPi * f[i], m);
  return ComplexTrace(std::move(f), std::move(v));
}

double effective_linewidth(const OmitModel& m) {
  return m.mech.Gamma_m + spring_and_damping(m.omega_d - m.omega0, m.Omega_m, m.kappa, m.g).Gamma_o;
}

CircleDiameters circle_diameters(double K, double kappa, double g, double Gamma_eff, double delta_m) {
  check_kappa(kappa);
  require(Gamma_eff > 0.0, "Gamma_eff must be positive");
  CircleDiameters d;
  d.d_c = K / kappa;
  d.d_m = 4.0 * K * (g * g / Gamma_eff) / (kappa * kappa + 4.0 * delta_m * delta_m);
  return d;
}

Cooperativities cooperativities(double g, double kappa, double Gamma_m, double Gamma_eff) {
  check_kappa(kappa);
  require(Gamma_m > 0.0 && Gamma_eff > 0.0, "linewidths must be positive");
  return {4.0 * g * g / (kappa * Gamma_m), 4.0 * g * g / (kappa * Gamma_eff)};
}

CouplingEstimate coupling_from_circles(double d_m, double d_c, double kappa, double delta_m, double Gamma_eff,
                                       double n_c) {
  check_kappa(kappa);
  require(d_c > 0.0, "d_c must be positive");
  require(d_m >= 0.0, "d_m must be non-negative");
  require(Gamma_eff > 0.0, "Gamma_eff must be positive");
  require(n_c > 0.0, "n_c must be positive");
  CouplingEstimate e;
  e.C_eff = d_m / d_c * (kappa * kappa + 4.0 * delta_m * delta_m) / (kappa * kappa);
  e.g = std::sqrt(0.25 * e.C_eff * kappa * Gamma_eff);
  e.g0 = e.g / std::sqrt(n_c);
  return e;
}

}  // namespace fluxom
