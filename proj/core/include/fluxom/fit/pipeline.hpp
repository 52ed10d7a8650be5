#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fluxom/fit/background.hpp"
#include "fluxom/fit/nlls.hpp"
#include "fluxom/params.hpp"
#include "fluxom/trace.hpp"

namespace fluxom {

struct PipelineInputs {
  ComplexTrace background_lo;
  ComplexTrace background_hi;
  ComplexTrace cavity;  // wide trace with the drive on
  ComplexTrace omit;    // narrow trace around omega_d + Omega_m
  // Optional flux sweep (bias current in metadata "bias_current_A") for the
  // local arch refit; uses operating_flux_phi0 or the omit metadata "flux_phi0".
  std::vector<ComplexTrace> flux_sweep;
  std::optional<double> operating_flux_phi0;
};

struct PipelineCalibration {
  // Drive power at the source; the omit trace metadata "p_source_dbm" wins when present.
  std::optional<double> P_source_dbm;
  double G_chain_db = -67.0;
};

struct PipelineOptions {
  double stitch_exclusion = 5.0;  // in units of kappa
  double drive_cut_hz = 0.5e6;    // half-width of the drive-tone cut
  // Rounds of dividing the fitted bare-cavity tails out of the background
  // pair before re-stitching; 0 stitches the raw traces.
  int background_refinements = 2;
  double systematic = 0.1;  // relative floor on sigma_g0
};

struct PipelineReport {
  double omega0 = 0, kappa = 0, K = 0, theta = 0;
  double omega_d = 0;
  double Omega_m = 0, Gamma_eff = 0, delta_m = 0;
  double d_c = 0, d_m = 0, C_eff = 0;
  double P_in_dbm = 0, n_c = 0;
  double g = 0, g0 = 0, sigma_g0 = 0, sigma_g0_stat = 0;
  std::optional<double> refit_responsivity;  // rad/s per Wb
  BackgroundFit background;
  FitResult cavity_fit;
  FitResult omit_fit;
  Metadata meta;
};

/// Background stitching and fit, background division, cavity fit with the
/// drive tone cut away, transparency-window fit, photon number from the drive
/// calibration, then g and g0. Errors carry the failing stage name.
PipelineReport run_g0_pipeline(const PipelineInputs& in, const PipelineCalibration& cal, const DeviceParams& dev,
                               const PipelineOptions& opt = {});

// Cyclic-Hz JSON (flux in Phi0, power in dBm).
std::string report_to_json(const PipelineReport& r, bool include_fits = true);

}  // namespace fluxom
