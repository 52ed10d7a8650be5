#include "fluxom/fit/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fluxom/error.hpp"
#include "fluxom/fit/background.hpp"

namespace fluxom {

CavityParams CavityParams::from(const FitResult& r) {
  CavityParams p;
  p.omega0 = r.value("omega0");
  p.kappa = r.value("kappa");
  p.K = r.value("K");
  p.theta = r.value("theta");
  p.a_p2 = r.value("a_p2");
  p.b_p2 = r.value("b_p2");
  p.a_phi2 = r.value("a_phi2");
  p.b_phi2 = r.value("b_phi2");
  return p;
}

cplx CavityParams::residual_background(double omega) const {
  return (a_p2 + b_p2 * omega) * std::polar(1.0, a_phi2 * omega + b_phi2);
}

cplx cavity_model(double omega, const CavityParams& p) {
  return p.residual_background(omega) * (1.0 - std::polar(p.K, p.theta) / cplx(p.kappa, 2.0 * (omega - p.omega0)));
}

namespace {

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

FitResult fit_cavity_response(const ComplexTrace& trace, std::span<const FrequencyWindow> cuts) {
  const std::size_t n = trace.size();
  std::vector<char> mask(n, 1);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& c : cuts)
      if (c.contains(trace.frequency(i))) mask[i] = 0;
    if (mask[i]) keep.push_back(i);
  }
  require(keep.size() >= 16, "cavity fit needs at least 16 points outside the cut windows");

  std::vector<double> mag;
  for (auto i : keep) mag.push_back(std::abs(trace.value(i)));
  const double med = median(mag);
  const auto imin = static_cast<std::size_t>(std::min_element(mag.begin(), mag.end()) - mag.begin());
  const double mmin = mag[imin];
  if (!(mmin < 0.95 * med)) fail(Errc::no_dip_found, "no resonance dip below 0.95 of the median magnitude");

  // width at half depth; a full Lorentzian dip has |S21| = 1/2 at |w - w0| = kappa / sqrt(12)
  const double level = 0.5 * (med + mmin);
  std::size_t a = imin, b = imin;
  while (a > 0 && mag[a - 1] < level) --a;
  while (b + 1 < mag.size() && mag[b + 1] < level) ++b;
  const double w_lo = a > 0 ? 0.5 * (trace.omega(keep[a]) + trace.omega(keep[a - 1])) : trace.omega(keep[a]);
  const double w_hi =
      b + 1 < keep.size() ? 0.5 * (trace.omega(keep[b]) + trace.omega(keep[b + 1])) : trace.omega(keep[b]);
  const double dw_grid = (trace.omega(n - 1) - trace.omega(0)) / static_cast<double>(n - 1);
  const double span = trace.omega(n - 1) - trace.omega(0);
  const double kappa0 = std::clamp(std::sqrt(3.0) * (w_hi - w_lo), 2.0 * dw_grid, span);
  const double omega0_init = trace.omega(keep[imin]);

  // residual background in u = (w - w_ref)/W, converted to literal w at the end
  const double w_ref = 0.5 * (trace.omega(0) + trace.omega(n - 1));
  const double W = 0.5 * span;
  std::vector<cplx> far;
  std::vector<double> far_u;
  for (auto i : keep) {
    if (std::abs(trace.omega(i) - omega0_init) < 2.0 * kappa0) continue;
    far.push_back(trace.value(i));
    far_u.push_back((trace.omega(i) - w_ref) / W);
  }
  double ph_slope = 0.0, ph_off = std::arg(trace.value(keep.front()));
  if (far.size() >= 2) {
    const auto phi = unwrap_phase(far, far_u);
    double mu = 0, mp = 0;
    for (std::size_t k = 0; k < phi.size(); ++k) mu += far_u[k], mp += phi[k];
    mu /= static_cast<double>(phi.size());
    mp /= static_cast<double>(phi.size());
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < phi.size(); ++k)
      sxy += (far_u[k] - mu) * (phi[k] - mp), sxx += (far_u[k] - mu) * (far_u[k] - mu);
    if (sxx > 0) ph_slope = sxy / sxx;
    ph_off = std::remainder(mp - ph_slope * mu, kTwoPi);
  }

  const double pi = std::numbers::pi;
  std::vector<ParamSpec> init = {
      {"omega0", omega0_init, trace.omega(0), trace.omega(n - 1), 0.05 * kappa0},
      {"kappa", kappa0, 0.0, INFINITY, 0.05 * kappa0},
      {"K", kappa0 * (1.0 - mmin / med), 0.0, INFINITY, 0.05 * kappa0},
      {"theta", 0.0, -pi, pi, 0.05},
      {"amp0", med, 0.0, INFINITY, 0.05 * med},
      {"amp1", 0.0, -INFINITY, INFINITY, 0.05 * med},
      {"ph1", ph_slope, -INFINITY, INFINITY, 0.05},
      {"ph0", ph_off, -INFINITY, INFINITY, 0.05},
  };
  const TraceModel model = [&](double w, std::span<const double> p) {
    const double u = (w - w_ref) / W;
    return (p[4] + p[5] * u) * std::polar(1.0, p[6] * u + p[7]) *
           (1.0 - std::polar(p[2], p[3]) / cplx(p[1], 2.0 * (w - p[0])));
  };
  auto r = nlls_minimize(model, trace, std::move(init), mask);
  require_converged(r, "cavity fit");

  // (amp0, amp1, ph1, ph0) -> (a_p2, b_p2, a_phi2, b_phi2); linear map on the last four
  const std::size_t m = r.names.size();
  std::vector<double> T(m * m, 0.0);
  for (std::size_t j = 0; j < 4; ++j) T[j * m + j] = 1.0;
  T[4 * m + 4] = 1.0;
  T[4 * m + 5] = -w_ref / W;  // a_p2 = amp0 - amp1 w_ref/W
  T[5 * m + 5] = 1.0 / W;     // b_p2 = amp1 / W
  T[6 * m + 6] = 1.0 / W;     // a_phi2 = ph1 / W
  T[7 * m + 7] = 1.0;         // b_phi2 = ph0 - ph1 w_ref/W
  T[7 * m + 6] = -w_ref / W;
  std::vector<double> v(m, 0.0), C(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) v[i] += T[i * m + k] * r.values[k];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l) s += T[i * m + k] * r.covariance[k * m + l] * T[j * m + l];
      C[i * m + j] = s;
    }
  r.values = v;
  r.covariance = C;
  r.names = {"omega0", "kappa", "K", "theta", "a_p2", "b_p2", "a_phi2", "b_phi2"};
  return r;
}

}  // namespace fluxom
