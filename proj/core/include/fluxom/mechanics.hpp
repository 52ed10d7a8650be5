#pragma once

#include "fluxom/params.hpp"
#include "fluxom/trace.hpp"

namespace fluxom {

struct ParasiticSideband {
  double amplitude = 0.0;  // S
  double phase = 0.0;      // sigma

  cplx value() const { return std::polar(amplitude, phase); }
};

double zero_point_motion(double mass, double Omega_m);

// k_B T / (hbar Omega_m)
double thermal_occupation(double T, double Omega_m);

/// First-order change in the SQUID loop current for an applied flux change
/// dPhi_b and a beam displacement x:
///   dJ = (dPhi_b - gamma B l x) / (L_l + 2 L_J)
double loop_current_shift(double dPhi_b, double x, const DeviceParams& dev, double L_J);

// gamma B l: flux coupled into the loop per metre of displacement.
double flux_per_displacement(const DeviceParams& dev);

/// Magnetostatically stiffened mechanical frequency (exact square-root form).
/// The stiffening term is multiplied by mech.stiffening_scale.
double stiffened_frequency(const DeviceParams& dev, double L_J);

// Omega_m - Omega0 from stiffened_frequency.
double stiffening_shift(const DeviceParams& dev, double L_J);

// High-Q steady-state amplitude x(Omega) = F0/(2 m Omega_m) / (Omega_m - Omega - i Gamma_m/2)
cplx driven_response(double Omega, double F0, const MechParams& p, double Omega_m);

// gamma B l / (2 m Omega_m)
double sideband_transduction(const DeviceParams& dev, double Omega_m);

// transduction * F / (Omega_m - Omega - i Gamma_m/2) + S e^{i sigma}
cplx upconverted_sideband(double Omega, double force, const MechParams& p, double Omega_m, double transduction,
                          const ParasiticSideband& parasitic);

}  // namespace fluxom
