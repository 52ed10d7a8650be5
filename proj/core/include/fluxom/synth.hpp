#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fluxom/mechanics.hpp"
#include "fluxom/optomech.hpp"
#include "fluxom/params.hpp"
#include "fluxom/squid.hpp"
#include "fluxom/trace.hpp"

namespace fluxom {

/// Complex background P(w) e^{i phi(w)} with
///   P   = a t^5 + b t^4 + c t^3 + d t^2 + e t + f + a1 cos(b1 t + c1) + a2 cos(b2 t + c2)
///   phi = a_phi t + b_phi
/// where t = (w - omega_ref) / omega_scale. With the defaults (0, 1) t is the
/// angular frequency itself.
struct BackgroundCoeffs {
  std::array<double, 6> poly{0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
  std::array<double, 3> cos1{};
  std::array<double, 3> cos2{};
  std::array<double, 2> phase{};
  double omega_ref = 0.0;
  double omega_scale = 1.0;

  double normalized(double omega) const { return (omega - omega_ref) / omega_scale; }
  double magnitude(double omega) const;
  double phase_at(double omega) const;

  // Throws if the magnitude is not strictly positive on the given grid (Hz).
  void validate_on(std::span<const double> grid_hz) const;
};

cplx background_eval(double omega, const BackgroundCoeffs& b);

// Cosine amplitude (relative to a unit baseline) giving a peak-to-peak ripple of `db`.
double ripple_amplitude_for_db(double db);
double ripple_db_for_amplitude(double amplitude);

/// Smooth background over [f_lo, f_hi] Hz in normalized coordinates: a gentle
/// quadratic tilt, one cable-ripple cosine of the given peak-to-peak dB and
/// period, and a linear phase (electrical delay in seconds).
BackgroundCoeffs ripple_background(double f_lo_hz, double f_hi_hz, double ripple_db, double period_hz,
                                   double delay_s = 5e-9, double level = 1.0);

struct NoiseSpec {
  std::uint64_t seed = 0;
  double sigma = 0.0;  // per quadrature
};

struct GridSpec {
  double f_start_hz = 0.0;
  double f_stop_hz = 0.0;
  std::size_t n_points = 0;

  std::vector<double> frequencies() const { return linear_grid(f_start_hz, f_stop_hz, n_points); }
};

enum class ScenarioKind { cavity, flux_sweep, omit, thermal_psd, driven_sideband };

std::string_view to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(std::string_view s);

struct CavityScenario {
  std::optional<double> f0_hz;  // overrides the arch prediction
  double flux_phi0 = 0.0;
  double kappa_hz = 9e6;
  double K_over_kappa = 1.0;
  double theta = 0.0;
};

struct FluxSweepScenario {
  std::vector<double> bias_currents_A;
  FluxCalibration calibration{kPhi0 / 100e-6, 0.0};
  double kappa_hz = 9e6;
  double K_over_kappa = 1.0;
  double theta = 0.0;
};

struct OmitScenario {
  double flux_phi0 = 1.4;
  double kappa_hz = 9e6;
  double K_over_kappa = 1.0;
  double theta = 0.0;
  double p_source_dbm = -33.0;
  double g_chain_db = -67.0;  // drive line
  double delta_m_hz = 0.0;
  std::optional<double> g0_hz;  // overrides the device-derived g0
  double leak_halfwidth_hz = 0.5e6;
  double leak_factor = 10.0;
  double f0_lo_hz = 5.15e9;  // background pair cavity positions
  double f0_hi_hz = 5.22e9;
  double omit_halfspan_hz = 100.0;
  std::size_t omit_points = 401;
};

struct ThermalPsdScenario {
  double flux_phi0 = 0.0;
  double floor = 1.0;
  double peak_over_floor = 10.0;
};

struct DrivenSidebandScenario {
  double flux_phi0 = 0.0;
  double force_N = 1e-15;
  double parasitic_rel = 0.0;  // S relative to the motional peak
  double parasitic_phase = 0.0;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::cavity;
  GridSpec grid;
  NoiseSpec noise;
  std::optional<BackgroundCoeffs> background;  // flat unity when absent
  CavityScenario cavity;
  FluxSweepScenario flux_sweep;
  OmitScenario omit;
  ThermalPsdScenario thermal;
  DrivenSidebandScenario sideband;
};

// Forward values behind an OMIT scenario.
struct OmitTruth {
  double omega0 = 0.0;
  double omega_d = 0.0;
  double kappa = 0.0;
  double K = 0.0;
  double theta = 0.0;
  double Omega_m = 0.0;
  double Gamma_eff = 0.0;
  double delta_m = 0.0;
  double responsivity = 0.0;
  double x_zpf = 0.0;
  double P_in = 0.0;  // W on chip
  double n_c = 0.0;
  double g0 = 0.0;
  double g = 0.0;
  double d_c = 0.0;
  double d_m = 0.0;
};

OmitTruth omit_truth(const OmitScenario& s, const DeviceParams& dev);
OmitModel omit_model(const OmitTruth& t, const DeviceParams& dev);

struct OmitSet {
  ComplexTrace background_lo;
  ComplexTrace background_hi;
  ComplexTrace cavity;
  ComplexTrace omit;
  OmitTruth truth;
};

/// Generates traces for a scenario on `grid_hz`. cavity, omit, thermal_psd and
/// driven_sideband give one trace; flux_sweep gives one per bias current,
/// seeded with seed + index. For omit, the grid is the narrow probe window.
std::vector<ComplexTrace> synthesize(const Scenario& s, const DeviceParams& dev, const BackgroundCoeffs& b,
                                     const NoiseSpec& n, std::span<const double> grid_hz);

// Uses s.grid, s.noise and s.background.
std::vector<ComplexTrace> synthesize(const Scenario& s, const DeviceParams& dev);

/// Full raw input for the g0 pipeline: background pair and cavity trace on the
/// wide grid, OMIT trace on a narrow window centred on omega_d + Omega_m.
/// Trace i is seeded with seed + i.
OmitSet synthesize_omit_set(const OmitScenario& s, const DeviceParams& dev, const BackgroundCoeffs& b,
                            const NoiseSpec& n, std::span<const double> wide_grid_hz);

// Adds i.i.d. complex Gaussian noise (sigma per quadrature) in place.
void add_noise(std::vector<cplx>& values, const NoiseSpec& n, bool real_only = false);

}  // namespace fluxom
