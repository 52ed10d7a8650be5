#include "fluxom/params.hpp"

#include <algorithm>
#include <cmath>

#include "fluxom/error.hpp"

namespace fluxom {

namespace {

void positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    fail(Errc::validation_error, std::string(name) + " must be positive and finite");
}

}  // namespace

void CircuitParams::validate() const {
  positive(L0, "L0_H");
  if (!(Lm >= 0.0) || !std::isfinite(Lm)) fail(Errc::validation_error, "Lm_H must be non-negative");
  positive(La, "La_H");
  positive(L1, "L1_H");
  positive(C, "C_F");
  positive(Cc, "Cc_F");
  positive(Z0, "Z0_ohm");
  if (R_loss) positive(*R_loss, "R_loss_ohm");
}

void SquidParams::validate() const {
  positive(Ic0, "Ic0_A");
  if (!(L_loop >= 0.0)) fail(Errc::validation_error, "L_loop_H must be non-negative");
  if (!(gamma_L > 0.0 && gamma_L <= 1.0)) fail(Errc::validation_error, "gamma_L must lie in (0, 1]");
  if (!(Lambda > 0.0 && Lambda < 1.0)) fail(Errc::validation_error, "Lambda must lie in (0, 1)");
  positive(omega0_sweet, "f0_sweet_Hz");
  positive(switch_threshold, "switch_threshold_phi0");
  // keeps the arch finite on the whole branch: cos argument stays below pi/2
  if (!(gamma_L * switch_threshold < 0.5))
    fail(Errc::validation_error, "switch_threshold_phi0 * gamma_L must stay below 0.5");
  for (std::size_t i = 0; i < field_table.size(); ++i) {
    const auto& row = field_table[i];
    if (!(row.gamma_L > 0.0 && row.gamma_L <= 1.0) || !(row.Lambda > 0.0 && row.Lambda < 1.0))
      fail(Errc::validation_error, "field_table entry has gamma_L/Lambda out of range");
    if (!(row.gamma_L * switch_threshold < 0.5))
      fail(Errc::validation_error, "field_table gamma_L * switch_threshold_phi0 must stay below 0.5");
    if (i > 0 && !(row.b_parallel > field_table[i - 1].b_parallel))
      fail(Errc::validation_error, "field_table must be sorted by strictly increasing b_parallel_T");
  }
}

SquidParams SquidParams::at_field(double b) const {
  SquidParams out = *this;
  out.field_table.clear();
  if (field_table.empty()) return out;
  if (b <= field_table.front().b_parallel) {
    out.gamma_L = field_table.front().gamma_L;
    out.Lambda = field_table.front().Lambda;
    return out;
  }
  if (b >= field_table.back().b_parallel) {
    out.gamma_L = field_table.back().gamma_L;
    out.Lambda = field_table.back().Lambda;
    return out;
  }
  auto hi = std::upper_bound(field_table.begin(), field_table.end(), b,
                             [](double x, const FieldDependentArch& r) { return x < r.b_parallel; });
  auto lo = hi - 1;
  const double w = (b - lo->b_parallel) / (hi->b_parallel - lo->b_parallel);
  out.gamma_L = lo->gamma_L + w * (hi->gamma_L - lo->gamma_L);
  out.Lambda = lo->Lambda + w * (hi->Lambda - lo->Lambda);
  return out;
}

void MechParams::validate() const {
  positive(mass, "mass_kg");
  positive(Omega0, "f0_Hz");
  positive(Gamma_m, "gamma_m_Hz");
  positive(length, "length_m");
  if (!(stiffening_scale >= 0.0) || !std::isfinite(stiffening_scale))
    fail(Errc::validation_error, "stiffening_scale must be non-negative");
}

void DeviceParams::validate() const {
  circuit.validate();
  squid.validate();
  mech.validate();
  if (!(b_parallel >= 0.0) || !std::isfinite(b_parallel))
    fail(Errc::validation_error, "b_parallel_T must be non-negative");
  if (!(gamma_mode > 0.0 && gamma_mode <= 1.0)) fail(Errc::validation_error, "gamma_mode must lie in (0, 1]");
}

}  // namespace fluxom
