#pragma once

#include "fluxom/params.hpp"

namespace fluxom {

// Inductor network after the Delta-Y reduction of the L0/Lm bridge.
struct CircuitDerived {
  double L_b = 0.0;
  double L2 = 0.0;
  double L3 = 0.0;
  double L_A = 0.0;
  double L = 0.0;       // reduced linear inductance
  double L_J = 0.0;     // junction inductance the totals were formed with
  double L_tot = 0.0;   // (L + L_J) / 2
  double C_tot = 0.0;   // 2C + Cc
  double Lambda = 0.0;  // L / (L + L_J0)
};

struct LumpedFrequencies {
  double omega0 = 0.0;
  double kappa_e = 0.0;
  double kappa_i = 0.0;
};

/// Reduces the bridge network to the two-inductor equivalent.
///
/// `L_J` enters L_tot; `L_J0` (zero-flux junction inductance) enters Lambda.
/// When `L_J0` is not given, `L_J` is used for both.
CircuitDerived delta_y_reduce(const CircuitParams& p, double L_J, double L_J0 = 0.0);

LumpedFrequencies lumped_frequencies(const CircuitDerived& d, const CircuitParams& p);

// Kerr shift per photon (rad/s); negative.
double kerr_anharmonicity(double C_tot, double Lambda);

// n_c = (2 P_in / hbar w_d) kappa_e / (kappa^2 + 4 Delta^2)
double intracavity_photons(double P_in, double omega_d, double Delta, double kappa, double kappa_e);

// HEMT noise power in dBm for noise temperature T (K) and bandwidth (Hz).
double hemt_reference_power(double T_hemt, double delta_f);

// Power in watts arriving on chip for a source power and a chain gain (dB).
double chain_input_power(double P_source_dbm, double G_chain_db);

}  // namespace fluxom
