#include "fluxom/fit/flux_arch.hpp"

#include <algorithm>
#include <cmath>

#include "fluxom/error.hpp"
#include "fluxom/fit/cavity.hpp"

namespace fluxom {

std::vector<double> sweep_resonances(std::span<const ComplexTrace> traces) {
  std::vector<double> out;
  out.reserve(traces.size());
  for (const auto& t : traces) out.push_back(angular_to_hz(fit_cavity_response(t).value("omega0")));
  return out;
}

std::vector<double> find_flux_jumps(std::span<const double> currents, std::span<const double> f0_hz,
                                    double min_jump_hz) {
  require(currents.size() == f0_hz.size(), "currents and resonances must have equal length");
  std::vector<double> jumps;
  if (currents.size() < 3) return jumps;
  std::vector<double> steps;
  for (std::size_t i = 1; i < f0_hz.size(); ++i) steps.push_back(std::abs(f0_hz[i] - f0_hz[i - 1]));
  auto sorted = steps;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double threshold = std::max(min_jump_hz, 10.0 * sorted[sorted.size() / 2]);
  for (std::size_t i = 0; i < steps.size(); ++i)
    if (steps[i] > threshold) jumps.push_back(0.5 * (currents[i] + currents[i + 1]));
  return jumps;
}

FitResult fit_flux_arch(std::span<const double> flux, std::span<const double> f0_hz, const SquidParams& start) {
  require(flux.size() == f0_hz.size(), "flux and resonances must have equal length");
  require(flux.size() >= 4, "arch fit needs at least four points");
  const double gmax = 0.5 * kPhi0 / *std::max_element(flux.begin(), flux.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  });
  const double g_hi = std::min(1.0, std::abs(gmax)) * (1.0 - 1e-9);
  std::vector<ParamSpec> init = {
      {"omega0_sweet", start.omega0_sweet, 0.0, INFINITY, 1e-4 * start.omega0_sweet},
      {"gamma_L", std::min(start.gamma_L, 0.99 * g_hi), 0.0, g_hi, 0.01},
      {"Lambda", start.Lambda, 0.0, 1.0, 1e-3},
  };
  ResidualFn f = [&](std::span<const double> p, std::span<double> r) {
    SquidParams s = start;
    s.omega0_sweet = p[0];
    s.gamma_L = p[1];
    s.Lambda = p[2];
    for (std::size_t i = 0; i < flux.size(); ++i) r[i] = (arch_frequency(flux[i], s) - kTwoPi * f0_hz[i]) / kTwoPi;
  };
  auto r = nlls_minimize(f, flux.size(), std::move(init));
  return require_converged(r, "flux arch fit");
}

SquidParams arch_from(const FitResult& r, SquidParams base) {
  base.omega0_sweet = r.value("omega0_sweet");
  base.gamma_L = r.value("gamma_L");
  base.Lambda = r.value("Lambda");
  return base;
}

}  // namespace fluxom
