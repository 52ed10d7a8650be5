#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "fluxom/params.hpp"
#include "fluxom/synth.hpp"

namespace fluxom {

struct CalibrationConfig {
  double P_source_dbm = -33.0;
  double G_signal_db = -110.0;
  double G_pump_db = -67.0;
  double T_hemt_K = 2.0;
};

struct Config {
  DeviceParams device;
  CalibrationConfig calibration;
};

/// Reads a JSON config with top-level sections "device" and "calibration".
/// Keys missing inside a section keep their defaults; unknown keys are
/// rejected. Syntax errors report line and column (Errc::parse_error),
/// out-of-range values name the offending key (Errc::validation_error).
Config parse_config(const std::filesystem::path& path);
Config parse_config_string(std::string_view text);
std::string config_to_json(const Config& cfg);

/// Scenario JSON: {"kind", "grid": {f_start_hz, f_stop_hz, n_points},
/// "noise": {seed, sigma}, optional "background", and an optional section
/// named after the kind with its parameters}.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_string(std::string_view text);

std::string background_to_json(const BackgroundCoeffs& b);

}  // namespace fluxom
