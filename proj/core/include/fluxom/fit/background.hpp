#pragma once

#include <span>
#include <vector>

#include "fluxom/synth.hpp"
#include "fluxom/trace.hpp"

namespace fluxom {

/// Joins two traces taken with the cavity at distant frequencies. A point of
/// each trace is usable where |w - w0| > exclusion * kappa; points usable in
/// both are averaged, points usable in neither are dropped.
ComplexTrace stitch_background(const ComplexTrace& trace_lo, const ComplexTrace& trace_hi, double omega0_lo,
                               double omega0_hi, double kappa, double exclusion = 5.0);

struct BackgroundFitOptions {
  int max_cosines = 2;
  // A cosine is kept only if it lowers the residual variance by this factor
  // per added parameter (an F-ratio) and its amplitude exceeds
  // min_cosine_amplitude relative to the mean magnitude.
  double min_f_ratio = 20.0;
  double min_cosine_amplitude = 1e-6;
};

struct BackgroundFit {
  BackgroundCoeffs coeffs;
  double magnitude_rms_rel = 0.0;  // RMS of (model - |data|)/|data|
  double phase_rms = 0.0;          // rad
  int n_cosines = 0;
};

// Polynomial + cosine fit to the magnitude, linear fit to the unwrapped phase.
BackgroundFit fit_background(const ComplexTrace& stitched, const BackgroundFitOptions& opt = {});

// Pointwise complex division; throws if |background| < 1e-12 anywhere.
ComplexTrace correct_background(const ComplexTrace& trace, const BackgroundCoeffs& b);

/// Phase of each value, unwrapped by continuity with a linear prediction from
/// the two previous points (nearest branch wins at exact ties).
std::vector<double> unwrap_phase(std::span<const cplx> values, std::span<const double> x);

}  // namespace fluxom
