#pragma once

#include "fluxom/fit/cavity.hpp"
#include "fluxom/fit/circle.hpp"
#include "fluxom/fit/nlls.hpp"
#include "fluxom/trace.hpp"

namespace fluxom {

struct OmitFitOptions {
  // The window must stand out by this many local noise standard deviations.
  double min_snr = 5.0;
  double min_amplitude = 1e-6;
};

/// Extracts the transparency window from a narrow, background-corrected probe
/// trace around omega_d + Omega_m.
///
/// The cavity fit (residual background, K, theta) maps the trace onto the
/// unit-diameter cavity circle anchored at 1; the bare cavity term is then
/// subtracted so that only the mechanical loop remains. Its diameter comes
/// from a circle fit; a response fit
///   w(W) = F + A / (1 + 2 i (Omega_m - W) / Gamma_eff),   W = omega - omega_d
/// gives Omega_m and Gamma_eff with a fitted complex Fano offset F.
///
/// Result parameters: Omega_m, Gamma_eff, delta_m (= omega0 - omega_d -
/// Omega_m), d_m (in the units of d_c = K/kappa), fano_re, fano_im, rotation
/// (arg A). Throws NoTransparencyWindow when no feature clears the noise.
FitResult fit_omit_window(const ComplexTrace& trace, const FitResult& cavity, double omega_d,
                          const OmitFitOptions& opt = {});

// The normalized, cavity-subtracted mechanical loop w(omega) used above.
std::vector<cplx> omit_loop(const ComplexTrace& trace, const CavityParams& cav);

}  // namespace fluxom
