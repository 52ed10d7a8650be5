#pragma once

#include <span>
#include <vector>

#include "fluxom/fit/nlls.hpp"
#include "fluxom/squid.hpp"
#include "fluxom/trace.hpp"

namespace fluxom {

// Resonance frequency (Hz) of each (background-corrected) trace from a cavity fit.
std::vector<double> sweep_resonances(std::span<const ComplexTrace> traces);

/// Bias currents at which the resonance jumps between flux branches: the
/// midpoints of consecutive points whose frequency step exceeds both
/// `min_jump_hz` and ten times the median step.
std::vector<double> find_flux_jumps(std::span<const double> currents, std::span<const double> f0_hz,
                                    double min_jump_hz);

/// Fits omega0_sweet, gamma_L and Lambda of the arch to (effective flux in
/// Wb, resonance in Hz) pairs, starting from `start`.
FitResult fit_flux_arch(std::span<const double> flux, std::span<const double> f0_hz, const SquidParams& start);

SquidParams arch_from(const FitResult& r, SquidParams base);

}  // namespace fluxom
