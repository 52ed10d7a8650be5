#pragma once

#include <optional>
#include <span>

#include "fluxom/params.hpp"

namespace fluxom {

enum class SweepDirection { up, down };

// Hysteretic flux bookkeeping for the metastable SQUID. The effective flux
// seen by the arch is phi_applied - branch * Phi0.
struct FluxState {
  double phi_applied = 0.0;  // Wb
  int branch = 0;
  SweepDirection direction = SweepDirection::up;

  double effective_flux() const { return phi_applied - branch * kPhi0; }
};

// Phi = current_to_flux * I + offset
struct FluxCalibration {
  double current_to_flux = 0.0;  // Wb/A
  double offset = 0.0;           // Wb

  double flux(double current) const { return current_to_flux * current + offset; }
  double current(double flux) const { return (flux - offset) / current_to_flux; }
};

double josephson_inductance(double Ic);

// L_J(Phi) = L_J0 / cos(pi gamma_L Phi / Phi0); throws PoleProximity off-branch.
double junction_inductance_at(double phi_eff, const SquidParams& s);

double screening_parameter(double Ic0, double L_loop);

/// Single-arch cavity frequency (rad/s):
///   w0(Phi) = w0s / sqrt(Lambda + (1 - Lambda) / cos(pi gamma_L Phi / Phi0))
/// Throws Errc::pole_proximity once the cosine argument reaches pi/2.
double arch_frequency(double phi_eff, const SquidParams& s);

// d w0 / d Phi in rad/s per Wb, signed (negative for Phi > 0).
double arch_slope(double phi_eff, const SquidParams& s);

// |d w0 / d Phi| in rad/s per Wb.
double flux_responsivity(double phi_eff, const SquidParams& s);

// Smallest positive in-branch flux where |d w0/d Phi| reaches `target`
// (rad/s per Wb), or nullopt when the branch never gets there.
std::optional<double> flux_for_responsivity(double target, const SquidParams& s);

FluxState resolve_flux_branch(double phi_applied, const FluxState& prior, const SquidParams& s);

/// Least-squares flux-axis calibration from hysteretic jump positions.
///
/// Consecutive jumps are one flux quantum apart. The first (fitted) jump is
/// assigned `first_jump_flux` (Wb), which fixes the offset. Jumps must be
/// strictly monotone; a decreasing list is a down-sweep.
FluxCalibration calibrate_flux_axis(std::span<const double> jump_currents, double first_jump_flux);

}  // namespace fluxom
