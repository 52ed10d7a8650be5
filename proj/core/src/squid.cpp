#include "fluxom/squid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fluxom/error.hpp"

namespace fluxom {

namespace {

double arch_phase(double phi_eff, const SquidParams& s) {
  const double a = std::numbers::pi * s.gamma_L * phi_eff / kPhi0;
  if (!(std::abs(a) < 0.5 * std::numbers::pi)) {
    fail(Errc::pole_proximity,
         "flux " + std::to_string(phi_eff / kPhi0) + " Phi0 is beyond the arch pole (gamma_L=" +
             std::to_string(s.gamma_L) + ")");
  }
  return a;
}

}  // namespace

double josephson_inductance(double Ic) {
  require(Ic > 0.0, "critical current must be positive");
  return kPhi0 / (kTwoPi * Ic);
}

double junction_inductance_at(double phi_eff, const SquidParams& s) {
  return josephson_inductance(s.Ic0) / std::cos(arch_phase(phi_eff, s));
}

double screening_parameter(double Ic0, double L_loop) {
  require(Ic0 > 0.0 && L_loop >= 0.0, "screening parameter needs Ic0 > 0 and L_loop >= 0");
  return 2.0 * Ic0 * L_loop / kPhi0;
}

double arch_frequency(double phi_eff, const SquidParams& s) {
  const double c = std::cos(arch_phase(phi_eff, s));
  return s.omega0_sweet / std::sqrt(s.Lambda + (1.0 - s.Lambda) / c);
}

double arch_slope(double phi_eff, const SquidParams& s) {
  const double a = arch_phase(phi_eff, s);
  const double c = std::cos(a);
  const double D = s.Lambda + (1.0 - s.Lambda) / c;
  const double dD = (1.0 - s.Lambda) * std::sin(a) / (c * c) * std::numbers::pi * s.gamma_L / kPhi0;
  return -0.5 * s.omega0_sweet * dD / (D * std::sqrt(D));
}

double flux_responsivity(double phi_eff, const SquidParams& s) { return std::abs(arch_slope(phi_eff, s)); }

std::optional<double> flux_for_responsivity(double target, const SquidParams& s) {
  require(target >= 0.0, "target responsivity must be non-negative");
  double hi = std::min(s.switch_threshold, 0.5 / s.gamma_L * (1.0 - 1e-9)) * kPhi0;
  if (flux_responsivity(hi, s) < target) return std::nullopt;
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * kPhi0; ++i) {
    const double mid = 0.5 * (lo + hi);
    (flux_responsivity(mid, s) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FluxState resolve_flux_branch(double phi_applied, const FluxState& prior, const SquidParams& s) {
  require(std::isfinite(phi_applied), "applied flux must be finite");
  FluxState next = prior;
  if (phi_applied > prior.phi_applied) next.direction = SweepDirection::up;
  if (phi_applied < prior.phi_applied) next.direction = SweepDirection::down;
  next.phi_applied = phi_applied;
  const double window = s.switch_threshold * kPhi0;
  while (next.effective_flux() > window) ++next.branch;
  while (next.effective_flux() < -window) --next.branch;
  return next;
}

FluxCalibration calibrate_flux_axis(std::span<const double> jump_currents, double first_jump_flux) {
  const std::size_t n = jump_currents.size();
  if (n < 2) fail(Errc::invalid_argument, "flux calibration needs at least two jumps");
  const bool increasing = jump_currents[1] > jump_currents[0];
  for (std::size_t i = 1; i < n; ++i) {
    const bool ok = increasing ? jump_currents[i] > jump_currents[i - 1] : jump_currents[i] < jump_currents[i - 1];
    if (!ok) fail(Errc::invalid_argument, "jump currents must be strictly monotone");
  }
  // I_k = a + b k
  double mean_k = 0.5 * static_cast<double>(n - 1);
  double mean_i = 0.0;
  for (double c : jump_currents) mean_i += c;
  mean_i /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dk = static_cast<double>(k) - mean_k;
    sxy += dk * (jump_currents[k] - mean_i);
    sxx += dk * dk;
  }
  const double slope = sxy / sxx;
  const double intercept = mean_i - slope * mean_k;

  FluxCalibration cal;
  cal.current_to_flux = kPhi0 / std::abs(slope);
  cal.offset = first_jump_flux - cal.current_to_flux * intercept;
  return cal;
}

}  // namespace fluxom
