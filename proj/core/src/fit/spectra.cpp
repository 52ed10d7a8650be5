#include "fluxom/fit/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "fluxom/error.hpp"

namespace fluxom {

namespace {

struct PeakGuess {
  std::size_t index = 0;
  double width = 0.0;  // full width at half height, rad/s
};

PeakGuess find_peak(const ComplexTrace& t, const std::vector<double>& h) {
  const std::size_t n = h.size();
  PeakGuess g;
  g.index = static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
  const double half = 0.5 * h[g.index];
  std::size_t a = g.index, b = g.index;
  while (a > 0 && h[a - 1] > half) --a;
  while (b + 1 < n && h[b + 1] > half) ++b;
  const double dw = (t.omega(n - 1) - t.omega(0)) / static_cast<double>(n - 1);
  g.width = std::max(t.omega(b) - t.omega(a), 2.0 * dw);
  return g;
}

}  // namespace

FitResult fit_thermal_psd(const ComplexTrace& psd) {
  const std::size_t n = psd.size();
  require(n >= 8, "PSD fit needs at least 8 points");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = psd.value(i).real();
  auto sorted = y;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 4), sorted.end());
  const double floor0 = sorted[n / 4];
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = y[i] - floor0;
  const auto g = find_peak(psd, h);
  const double peak0 = h[g.index];
  require(peak0 > 0.0, "PSD has no peak above the floor");

  std::vector<ParamSpec> init = {
      {"Omega_m", psd.omega(g.index), psd.omega(0), psd.omega(n - 1), 0.05 * g.width},
      {"Gamma_m", g.width, 0.0, INFINITY, 0.05 * g.width},
      {"peak", peak0, 0.0, INFINITY, 0.05 * peak0},
      {"floor", floor0, -INFINITY, INFINITY, 0.05 * std::max(std::abs(floor0), peak0)},
  };
  ResidualFn f = [&](std::span<const double> p, std::span<double> r) {
    const double hw = 0.5 * p[1];
    for (std::size_t i = 0; i < n; ++i) {
      const double d = psd.omega(i) - p[0];
      r[i] = p[3] + p[2] * hw * hw / (d * d + hw * hw) - y[i];
    }
  };
  auto r = nlls_minimize(f, n, std::move(init));
  return require_converged(r, "thermal PSD fit");
}

FitResult fit_driven_sideband(const ComplexTrace& trace) {
  const std::size_t n = trace.size();
  require(n >= 8, "sideband fit needs at least 8 points");
  // the parasitic constant dominates far from resonance
  std::vector<double> re, im;
  for (std::size_t i = 0; i < n; ++i) re.push_back(trace.value(i).real()), im.push_back(trace.value(i).imag());
  const cplx S0((re.front() + re.back()) / 2.0, (im.front() + im.back()) / 2.0);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = std::abs(trace.value(i) - S0);
  const auto g = find_peak(trace, h);
  // on resonance A / (-i G/2) = v - S  ->  A = (v - S)(-i G/2)
  const cplx A0 = (trace.value(g.index) - S0) * cplx(0.0, -0.5 * g.width);
  const double a = std::abs(A0);
  require(a > 0.0, "sideband trace has no resonance");
  const double s_scale = std::max(std::abs(S0), 0.01 * h[g.index]);

  std::vector<ParamSpec> init = {
      {"Omega_m", trace.omega(g.index), trace.omega(0), trace.omega(n - 1), 0.05 * g.width},
      {"Gamma_m", g.width, 0.0, INFINITY, 0.05 * g.width},
      {"A_re", A0.real(), -INFINITY, INFINITY, 0.05 * a},
      {"A_im", A0.imag(), -INFINITY, INFINITY, 0.05 * a},
      {"S_re", S0.real(), -INFINITY, INFINITY, 0.05 * s_scale},
      {"S_im", S0.imag(), -INFINITY, INFINITY, 0.05 * s_scale},
  };
  const TraceModel model = [](double w, std::span<const double> p) {
    return cplx(p[2], p[3]) / cplx(p[0] - w, -0.5 * p[1]) + cplx(p[4], p[5]);
  };
  auto r = nlls_minimize(model, trace, std::move(init));
  return require_converged(r, "driven sideband fit");
}

ParasiticSideband parasitic_from(const FitResult& fit) {
  const cplx S(fit.value("S_re"), fit.value("S_im"));
  return {std::abs(S), std::arg(S)};
}

ComplexTrace subtract_parasitic(const ComplexTrace& trace, const ParasiticSideband& p) {
  std::vector<cplx> v(trace.values().begin(), trace.values().end());
  for (auto& x : v) x -= p.value();
  Metadata meta = trace.meta();
  meta["parasitic_subtracted"] = "true";
  return ComplexTrace(std::vector<double>(trace.frequency().begin(), trace.frequency().end()), std::move(v),
                      std::move(meta));
}

}  // namespace fluxom
