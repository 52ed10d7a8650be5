#pragma once

#include <span>

#include "fluxom/params.hpp"
#include "fluxom/trace.hpp"

namespace fluxom {

struct CouplingPoint {
  double responsivity = 0.0;  // rad/s per Wb
  double g0 = 0.0;            // rad/s
  double n_c = 0.0;
  double g = 0.0;       // g0 sqrt(n_c)
  double G_pull = 0.0;  // rad/s per m
};

struct OmitGeometry {
  double kappa = 0.0;
  double K = 0.0;
  double theta = 0.0;
  double Gamma_eff = 0.0;
  double Omega_m = 0.0;
  double delta_m = 0.0;  // omega0 - omega_d - Omega_m
  double d_c = 0.0;
  double d_m = 0.0;
};

// Steady-state intracavity field for a coherent drive; |alpha_bar|^2 = n_c.
struct FieldAmplitudes {
  cplx alpha_bar;
  double S_in = 0.0;  // sqrt(photon flux), 1/sqrt(s)
};

struct Susceptibilities {
  cplx chi_c;
  cplx Sigma;
  cplx chi_m_eff;
};

struct SpringDamping {
  double dOmega_m = 0.0;
  double Gamma_o = 0.0;
};

struct CircleDiameters {
  double d_c = 0.0;
  double d_m = 0.0;
};

struct Cooperativities {
  double C = 0.0;
  double C_eff = 0.0;
};

struct CouplingEstimate {
  double C_eff = 0.0;
  double g = 0.0;
  double g0 = 0.0;
};

// g0 = responsivity * gamma B l * x_zpf
double single_photon_coupling(double responsivity, const DeviceParams& dev, double x_zpf);

CouplingPoint coupling_point(double responsivity, const DeviceParams& dev, double x_zpf, double n_c);

FieldAmplitudes steady_state_field(double P_in, double omega_d, double Delta, double kappa, double kappa_e);

// chi_c(Omega) = 1 / (kappa/2 - i (Delta + Omega))
cplx cavity_susceptibility(double Omega, double Delta, double kappa);

/// Cavity susceptibility, self-energy Sigma(Omega_m) and the effective
/// mechanical susceptibility in the high-Q approximation:
///   chi_m_eff = 1/(2 m Omega_m) / (Omega_m - Omega - i Gamma_m/2 + Sigma)
Susceptibilities susceptibilities(double Omega, double Delta, double kappa, double g, const MechParams& p,
                                  double Omega_m);

// Closed forms; equal to (Re Sigma, -2 Im Sigma).
SpringDamping spring_and_damping(double Delta, double Omega_m, double kappa, double g);

struct OmitModel {
  double kappa = 0.0;
  double K = 0.0;
  double theta = 0.0;
  double omega0 = 0.0;
  double omega_d = 0.0;
  double g = 0.0;
  MechParams mech;
  double Omega_m = 0.0;
};

// 1 - K e^{i theta} / (kappa + 2 i (omega - omega0))
cplx bare_cavity_response(double omega, double omega0, double kappa, double K, double theta);

/// Probe transmission with the mechanical contribution:
///   S21 = 1 - K e^{i theta}/(kappa + 2 i (Delta + Omega)) [1 + i 2 m Omega_m g^2 chi_c chi_m_eff]
/// with Delta = omega_d - omega0 and Omega = omega - omega_d.
cplx omit_response(double omega, const OmitModel& m);

// Warns once per call if g > kappa/10.
ComplexTrace omit_response_trace(std::span<const double> grid_hz, const OmitModel& m);

double effective_linewidth(const OmitModel& m);

CircleDiameters circle_diameters(double K, double kappa, double g, double Gamma_eff, double delta_m);

Cooperativities cooperativities(double g, double kappa, double Gamma_m, double Gamma_eff);

CouplingEstimate coupling_from_circles(double d_m, double d_c, double kappa, double delta_m, double Gamma_eff,
                                       double n_c);

}  // namespace fluxom
