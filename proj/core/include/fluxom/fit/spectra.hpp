#pragma once

#include "fluxom/fit/nlls.hpp"
#include "fluxom/mechanics.hpp"
#include "fluxom/trace.hpp"

namespace fluxom {

/// Lorentzian on a flat floor fitted to the real part of a PSD trace:
///   S(w) = floor + peak (G/2)^2 / ((w - Omega_m)^2 + (G/2)^2)
/// Parameters: Omega_m, Gamma_m (FWHM, rad/s), peak, floor.
FitResult fit_thermal_psd(const ComplexTrace& psd);

/// Motional Lorentzian plus a constant parasitic term:
///   v(W) = A / (Omega_m - W - i Gamma_m/2) + S e^{i sigma}
/// Parameters: Omega_m, Gamma_m, A_re, A_im, S_re, S_im.
FitResult fit_driven_sideband(const ComplexTrace& trace);

ParasiticSideband parasitic_from(const FitResult& sideband_fit);

// Trace with the fitted parasitic constant removed.
ComplexTrace subtract_parasitic(const ComplexTrace& trace, const ParasiticSideband& p);

}  // namespace fluxom
