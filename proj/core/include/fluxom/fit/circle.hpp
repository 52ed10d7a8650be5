#pragma once

#include <span>

#include "fluxom/fit/nlls.hpp"
#include "fluxom/trace.hpp"

namespace fluxom {

struct CircleFit {
  cplx center;
  double diameter = 0.0;
  double rms_radial_residual = 0.0;
  double sigma_diameter = 0.0;  // 1-sigma from the geometric fit
};

/// Algebraic (Kasa) least-squares circle as a start, then geometric
/// refinement of the radial residuals |z - c| - r. Throws CollinearPoints for
/// fewer than three points or points on a line.
CircleFit fit_circle(std::span<const cplx> points);

}  // namespace fluxom
