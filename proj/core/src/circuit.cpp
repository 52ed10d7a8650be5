#include "fluxom/circuit.hpp"

#include <cmath>

#include "fluxom/error.hpp"

namespace fluxom {

CircuitDerived delta_y_reduce(const CircuitParams& p, double L_J, double L_J0) {
  p.validate();
  require(L_J > 0.0, "junction inductance must be positive");
  if (L_J0 <= 0.0) L_J0 = L_J;

  CircuitDerived d;
  const double bridge = 2.0 * p.L0 + p.Lm;
  d.L_b = p.L0 * p.Lm / bridge;
  d.L2 = p.L0 * p.L0 / bridge;
  d.L3 = p.L1 + d.L2;
  d.L_A = p.La + d.L_b;
  d.L = d.L_A + 2.0 * d.L3;
  d.L_J = L_J;
  d.L_tot = 0.5 * (d.L + L_J);
  d.C_tot = 2.0 * p.C + p.Cc;
  d.Lambda = d.L / (d.L + L_J0);
  return d;
}

LumpedFrequencies lumped_frequencies(const CircuitDerived& d, const CircuitParams& p) {
  require(d.L_tot > 0.0 && d.C_tot > 0.0, "circuit totals must be positive");
  LumpedFrequencies f;
  f.omega0 = 1.0 / std::sqrt(d.L_tot * d.C_tot);
  f.kappa_e = f.omega0 * f.omega0 * p.Cc * p.Cc * p.Z0 / (2.0 * d.C_tot);
  f.kappa_i = p.R_loss ? 1.0 / (*p.R_loss * d.C_tot) : 0.0;
  return f;
}

double kerr_anharmonicity(double C_tot, double Lambda) {
  require(C_tot > 0.0, "C_tot must be positive");
  require(Lambda > 0.0 && Lambda < 1.0, "Lambda must lie in (0, 1)");
  const double e = PhysicalConstants::e_charge;
  const double dilution = 1.0 - Lambda;
  return -e * e / (2.0 * kHbar * C_tot) * dilution * dilution * dilution;
}

double intracavity_photons(double P_in, double omega_d, double Delta, double kappa, double kappa_e) {
  require(P_in >= 0.0, "input power must be non-negative");
  require(omega_d > 0.0, "drive frequency must be positive");
  require(kappa > 0.0, "kappa must be positive");
  require(kappa_e > 0.0 && kappa_e <= kappa, "kappa_e must lie in (0, kappa]");
  return 2.0 * P_in / (kHbar * omega_d) * kappa_e / (kappa * kappa + 4.0 * Delta * Delta);
}

double hemt_reference_power(double T_hemt, double delta_f) {
  require(T_hemt > 0.0, "HEMT noise temperature must be positive");
  require(delta_f > 0.0, "bandwidth must be positive");
  return 10.0 * std::log10(PhysicalConstants::k_B * T_hemt / 1e-3) + 10.0 * std::log10(delta_f);
}

double chain_input_power(double P_source_dbm, double G_chain_db) {
  return dbm_to_watt(P_source_dbm + G_chain_db);
}

}  // namespace fluxom
