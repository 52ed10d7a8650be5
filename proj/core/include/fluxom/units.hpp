#pragma once

#include <numbers>

namespace fluxom {

// SI constants (CODATA 2018 exact values where defined).
struct PhysicalConstants {
  static constexpr double h = 6.62607015e-34;
  static constexpr double hbar = h / (2.0 * std::numbers::pi);
  static constexpr double k_B = 1.380649e-23;
  static constexpr double e_charge = 1.602176634e-19;
  static constexpr double Phi0 = 2.067833848e-15;
  static constexpr double default_Z0 = 50.0;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kPhi0 = PhysicalConstants::Phi0;
inline constexpr double kHbar = PhysicalConstants::hbar;

enum class PowerUnit { dBm_to_W, W_to_dBm };
enum class FrequencyUnit { Hz_to_rad_s, rad_s_to_Hz };

/// Converts between dBm and watts. Throws Errc::invalid_argument for a
/// non-positive (or non-finite) power in the W -> dBm direction.
double convert_power(double p, PowerUnit direction);
double convert_frequency(double f, FrequencyUnit direction);

inline double dbm_to_watt(double dbm) { return convert_power(dbm, PowerUnit::dBm_to_W); }
inline double watt_to_dbm(double w) { return convert_power(w, PowerUnit::W_to_dBm); }
inline constexpr double hz_to_angular(double f) { return kTwoPi * f; }
inline constexpr double angular_to_hz(double w) { return w / kTwoPi; }

}  // namespace fluxom
