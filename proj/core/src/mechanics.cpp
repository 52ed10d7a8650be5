#include "fluxom/mechanics.hpp"

#include <cmath>

#include "fluxom/error.hpp"

namespace fluxom {

namespace {

double loop_inductance(const DeviceParams& dev, double L_J) {
  const double Ls = dev.squid.L_loop + 2.0 * L_J;
  require(Ls > 0.0, "L_loop + 2 L_J must be positive");
  return Ls;
}

}  // namespace

double zero_point_motion(double mass, double Omega_m) {
  require(mass > 0.0 && Omega_m > 0.0, "x_zpf needs positive mass and frequency");
  return std::sqrt(kHbar / (2.0 * mass * Omega_m));
}

double thermal_occupation(double T, double Omega_m) {
  require(T >= 0.0, "temperature must be non-negative");
  require(Omega_m > 0.0, "mechanical frequency must be positive");
  return PhysicalConstants::k_B * T / (kHbar * Omega_m);
}

double flux_per_displacement(const DeviceParams& dev) { return dev.gamma_mode * dev.b_parallel * dev.mech.length; }

double loop_current_shift(double dPhi_b, double x, const DeviceParams& dev, double L_J) {
  const double Ls = loop_inductance(dev, L_J);
  return dPhi_b / Ls - flux_per_displacement(dev) * x / Ls;
}

double stiffened_frequency(const DeviceParams& dev, double L_J) {
  const auto& m = dev.mech;
  const double Ls = loop_inductance(dev, L_J);
  const double a = flux_per_displacement(dev);
  return std::sqrt(m.Omega0 * m.Omega0 + m.stiffening_scale * a * a / (m.mass * Ls));
}

double stiffening_shift(const DeviceParams& dev, double L_J) {
  const auto& m = dev.mech;
  const double Ls = loop_inductance(dev, L_J);
  const double a = flux_per_displacement(dev);
  const double k = m.stiffening_scale * a * a / (m.mass * Ls);
  // sqrt(W^2 + k) - W without cancellation
  return k / (std::sqrt(m.Omega0 * m.Omega0 + k) + m.Omega0);
}

cplx driven_response(double Omega, double F0, const MechParams& p, double Omega_m) {
  require(p.Gamma_m > 0.0 && Omega_m > 0.0, "mechanical response needs positive rates");
  return F0 / (2.0 * p.mass * Omega_m) / cplx(Omega_m - Omega, -0.5 * p.Gamma_m);
}

double sideband_transduction(const DeviceParams& dev, double Omega_m) {
  require(Omega_m > 0.0, "mechanical frequency must be positive");
  return flux_per_displacement(dev) / (2.0 * dev.mech.mass * Omega_m);
}

cplx upconverted_sideband(double Omega, double force, const MechParams& p, double Omega_m, double transduction,
                          const ParasiticSideband& parasitic) {
  require(parasitic.amplitude >= 0.0, "parasitic amplitude must be non-negative");
  return transduction * force / cplx(Omega_m - Omega, -0.5 * p.Gamma_m) + parasitic.value();
}

}  // namespace fluxom
