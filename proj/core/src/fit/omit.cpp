#include "fluxom/fit/omit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fluxom/error.hpp"

namespace fluxom {

std::vector<cplx> omit_loop(const ComplexTrace& trace, const CavityParams& cav) {
  require(cav.kappa > 0.0 && cav.K > 0.0, "cavity fit must have positive kappa and K");
  const cplx scale = cav.kappa / std::polar(cav.K, cav.theta);
  std::vector<cplx> w(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double om = trace.omega(i);
    const cplx s = trace.value(i) / cav.residual_background(om);
    const cplx z = 1.0 - (1.0 - s) * scale;
    const cplx bare = 1.0 - cav.kappa / cplx(cav.kappa, 2.0 * (om - cav.omega0));
    w[i] = z - bare;
  }
  return w;
}

namespace {

cplx complex_median(const std::vector<cplx>& v) {
  std::vector<double> re, im;
  for (const auto& z : v) re.push_back(z.real()), im.push_back(z.imag());
  const auto mid = static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(re.begin(), re.begin() + mid, re.end());
  std::nth_element(im.begin(), im.begin() + mid, im.end());
  return {re[static_cast<std::size_t>(mid)], im[static_cast<std::size_t>(mid)]};
}

// Per-quadrature noise from first differences (robust: median absolute value).
double local_noise(const std::vector<cplx>& w) {
  std::vector<double> d;
  for (std::size_t i = 1; i < w.size(); ++i) {
    d.push_back(std::abs((w[i] - w[i - 1]).real()));
    d.push_back(std::abs((w[i] - w[i - 1]).imag()));
  }
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  // MAD of a normal difference: 0.6745 * sqrt(2) sigma
  return *mid / (0.6745 * std::sqrt(2.0));
}

}  // namespace

FitResult fit_omit_window(const ComplexTrace& trace, const FitResult& cavity, double omega_d,
                          const OmitFitOptions& opt) {
  require(trace.size() >= 8, "transparency fit needs at least 8 points");
  const auto cav = CavityParams::from(cavity);
  const auto w = omit_loop(trace, cav);
  const std::size_t n = w.size();

  // detection
  const cplx base = complex_median(w);
  std::size_t ipk = 0;
  double amp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(w[i] - base);
    if (a > amp) amp = a, ipk = i;
  }
  const double noise = local_noise(w);
  if (!(amp > std::max(opt.min_snr * noise, opt.min_amplitude)))
    fail(Errc::no_transparency_window, "feature amplitude " + format_double(amp) + " below " +
                                           format_double(opt.min_snr) + "x local noise " + format_double(noise));

  // diameter of the mechanical loop
  const auto circle = fit_circle(w);

  // response fit in W = omega - omega_d
  const double half = 0.5 * amp;
  std::size_t a = ipk, b = ipk;
  while (a > 0 && std::abs(w[a - 1] - base) > half) --a;
  while (b + 1 < n && std::abs(w[b + 1] - base) > half) ++b;
  const double dW = (trace.omega(n - 1) - trace.omega(0)) / static_cast<double>(n - 1);
  const double width = std::max(trace.omega(b) - trace.omega(a), 2.0 * dW);
  const double gamma0 = width / std::sqrt(3.0);
  const double W_lo = trace.omega(0) - omega_d, W_hi = trace.omega(n - 1) - omega_d;
  const cplx A0 = w[ipk] - base;

  std::vector<ParamSpec> init = {
      {"fano_re", base.real(), -INFINITY, INFINITY, 0.01 * amp},
      {"fano_im", base.imag(), -INFINITY, INFINITY, 0.01 * amp},
      {"A_re", A0.real(), -INFINITY, INFINITY, 0.01 * amp},
      {"A_im", A0.imag(), -INFINITY, INFINITY, 0.01 * amp},
      {"Omega_m", trace.omega(ipk) - omega_d, W_lo, W_hi, 0.05 * gamma0},
      {"Gamma_eff", gamma0, 0.0, INFINITY, 0.05 * gamma0},
  };
  std::vector<double> Wg(n);
  for (std::size_t i = 0; i < n; ++i) Wg[i] = trace.omega(i) - omega_d;
  ResidualFn f = [&](std::span<const double> p, std::span<double> r) {
    const cplx F(p[0], p[1]), A(p[2], p[3]);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx d = F + A / cplx(1.0, 2.0 * (p[4] - Wg[i]) / p[5]) - w[i];
      r[2 * i] = d.real();
      r[2 * i + 1] = d.imag();
    }
  };
  auto fit = nlls_minimize(f, 2 * n, std::move(init));
  require_converged(fit, "transparency response fit");

  const double Om = fit.value("Omega_m");
  const double d_c = cav.K / cav.kappa;
  FitResult out;
  out.names = {"Omega_m", "Gamma_eff", "delta_m", "d_m", "fano_re", "fano_im", "rotation"};
  out.values = {Om,
                fit.value("Gamma_eff"),
                cav.omega0 - omega_d - Om,
                circle.diameter * d_c,
                fit.value("fano_re"),
                fit.value("fano_im"),
                std::atan2(fit.value("A_im"), fit.value("A_re"))};
  const std::size_t m = out.names.size();
  out.covariance.assign(m * m, 0.0);
  auto set = [&](std::size_t i, std::size_t j, double v) {
    out.covariance[i * m + j] = v;
    out.covariance[j * m + i] = v;
  };
  set(0, 0, fit.cov("Omega_m", "Omega_m"));
  set(1, 1, fit.cov("Gamma_eff", "Gamma_eff"));
  set(0, 1, fit.cov("Omega_m", "Gamma_eff"));
  set(2, 2, fit.cov("Omega_m", "Omega_m") + cavity.cov("omega0", "omega0"));
  set(0, 2, -fit.cov("Omega_m", "Omega_m"));
  set(1, 2, -fit.cov("Omega_m", "Gamma_eff"));
  const double sd = circle.sigma_diameter * d_c;
  set(3, 3, sd * sd);
  set(4, 4, fit.cov("fano_re", "fano_re"));
  set(5, 5, fit.cov("fano_im", "fano_im"));
  set(4, 5, fit.cov("fano_re", "fano_im"));
  {
    const double ar = fit.value("A_re"), ai = fit.value("A_im");
    const double n2 = ar * ar + ai * ai;
    const double gr = -ai / n2, gi = ar / n2;
    set(6, 6, gr * gr * fit.cov("A_re", "A_re") + 2 * gr * gi * fit.cov("A_re", "A_im") + gi * gi * fit.cov("A_im", "A_im"));
  }
  out.residual_norm = fit.residual_norm;
  out.n_residuals = fit.n_residuals;
  out.n_iterations = fit.n_iterations;
  out.converged = fit.converged;
  out.message = fit.message;
  return out;
}

}  // namespace fluxom
