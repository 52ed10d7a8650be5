#include "fluxom/units.hpp"

#include <cmath>
#include <string>

#include "fluxom/error.hpp"

namespace fluxom {

double convert_power(double p, PowerUnit direction) {
  require(std::isfinite(p), "power must be finite");
  if (direction == PowerUnit::dBm_to_W) return 1e-3 * std::pow(10.0, p / 10.0);
  require(p > 0.0, "power in watts must be positive for dBm conversion, got " + std::to_string(p));
  return 10.0 * std::log10(p / 1e-3);
}

double convert_frequency(double f, FrequencyUnit direction) {
  require(std::isfinite(f), "frequency must be finite");
  return direction == FrequencyUnit::Hz_to_rad_s ? f * kTwoPi : f / kTwoPi;
}

}  // namespace fluxom
