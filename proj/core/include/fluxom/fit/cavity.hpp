#pragma once

#include <span>
#include <vector>

#include "fluxom/fit/nlls.hpp"
#include "fluxom/trace.hpp"

namespace fluxom {

// Closed frequency interval in Hz.
struct FrequencyWindow {
  double lo_hz = 0.0;
  double hi_hz = 0.0;

  bool contains(double f_hz) const { return f_hz >= lo_hz && f_hz <= hi_hz; }
  static FrequencyWindow around(double center_hz, double half_width_hz) {
    return {center_hz - half_width_hz, center_hz + half_width_hz};
  }
};

struct CavityParams {
  double omega0 = 0.0;
  double kappa = 0.0;
  double K = 0.0;
  double theta = 0.0;
  // residual background (a_p2 + b_p2 w) e^{i (a_phi2 w + b_phi2)}
  double a_p2 = 1.0;
  double b_p2 = 0.0;
  double a_phi2 = 0.0;
  double b_phi2 = 0.0;

  static CavityParams from(const FitResult& r);
  cplx residual_background(double omega) const;
};

cplx cavity_model(double omega, const CavityParams& p);

/// Fits (a_p2 + b_p2 w)(1 - K e^{i theta}/(kappa + 2 i (w - w0))) e^{i(a_phi2 w + b_phi2)}.
///
/// Parameters are named omega0, kappa, K, theta, a_p2, b_p2, a_phi2, b_phi2
/// (rad/s, rad). Points inside any of `cuts` are ignored. Throws NoDipFound
/// when min |S21| is not below 0.95 of the median and NonConvergence when the
/// minimizer gives up.
FitResult fit_cavity_response(const ComplexTrace& trace, std::span<const FrequencyWindow> cuts = {});

}  // namespace fluxom
