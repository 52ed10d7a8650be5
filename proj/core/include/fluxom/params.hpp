#pragma once

#include <optional>
#include <vector>

#include "fluxom/units.hpp"

namespace fluxom {

// Lumped circuit of the SQUID cavity. Capacitances are direct inputs.
struct CircuitParams {
  double L0 = 1e-9;
  double Lm = 60e-12;
  double La = 45e-12;
  double L1 = 140e-12;
  double C = 680e-15;
  double Cc = 34e-15;
  double Z0 = PhysicalConstants::default_Z0;
  std::optional<double> R_loss;  // absent means lossless

  void validate() const;
};

// gamma_L and Lambda measured at one in-plane field.
struct FieldDependentArch {
  double b_parallel = 0.0;
  double gamma_L = 0.23;
  double Lambda = 0.99;
};

struct SquidParams {
  double Ic0 = 25e-6;
  double L_loop = 150e-12;
  double gamma_L = 0.23;
  double Lambda = 0.99;
  double omega0_sweet = kTwoPi * 5.221e9;
  double switch_threshold = 1.6;  // flux in units of Phi0
  // Optional (B_par -> gamma_L, Lambda) table, sorted by field; linearly
  // interpolated and clamped at the ends by `at_field`.
  std::vector<FieldDependentArch> field_table;

  void validate() const;
  SquidParams at_field(double b_parallel) const;
};

struct MechParams {
  double mass = 1e-15;
  double Omega0 = kTwoPi * 7.129e6;
  double Gamma_m = kTwoPi * 8.0;
  double length = 20e-6;
  // Empirical multiplier on the magnetostatic stiffening term; 1 is the bare model.
  double stiffening_scale = 1.0;

  double quality_factor() const { return Omega0 / Gamma_m; }
  void validate() const;
};

struct DeviceParams {
  CircuitParams circuit;
  SquidParams squid;
  MechParams mech;
  double b_parallel = 0.0;   // T
  double gamma_mode = 0.86;  // mode-shape factor

  void validate() const;
  // Squid parameters resolved for this device's in-plane field.
  SquidParams squid_at_field() const { return squid.at_field(b_parallel); }
};

}  // namespace fluxom
