#include "fluxom/fit/background.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fluxom/error.hpp"
#include "fluxom/fit/nlls.hpp"

namespace fluxom {

ComplexTrace stitch_background(const ComplexTrace& trace_lo, const ComplexTrace& trace_hi, double omega0_lo,
                               double omega0_hi, double kappa, double exclusion) {
  require(kappa > 0.0 && exclusion >= 0.0, "stitching needs kappa > 0 and a non-negative exclusion");
  if (trace_lo.size() != trace_hi.size()) fail(Errc::grid_mismatch, "background traces have different lengths");
  for (std::size_t i = 0; i < trace_lo.size(); ++i) {
    const double a = trace_lo.frequency(i), b = trace_hi.frequency(i);
    if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), 1.0))
      fail(Errc::grid_mismatch, "background traces are not on the same grid");
  }
  if (std::abs(omega0_lo - omega0_hi) <= 1e-12 * std::abs(omega0_lo))
    fail(Errc::invalid_argument, "both background traces have the cavity at the same frequency");

  const double half = exclusion * kappa;
  std::vector<double> f;
  std::vector<cplx> v;
  for (std::size_t i = 0; i < trace_lo.size(); ++i) {
    const double w = trace_lo.omega(i);
    const bool use_lo = std::abs(w - omega0_lo) > half;
    const bool use_hi = std::abs(w - omega0_hi) > half;
    if (!use_lo && !use_hi) continue;
    f.push_back(trace_lo.frequency(i));
    if (use_lo && use_hi)
      v.push_back(0.5 * (trace_lo.value(i) + trace_hi.value(i)));
    else
      v.push_back(use_lo ? trace_lo.value(i) : trace_hi.value(i));
  }
  if (f.size() < 2) fail(Errc::invalid_argument, "exclusion windows cover the whole grid");
  Metadata meta = trace_lo.meta();
  meta["kind"] = "stitched_background";
  meta["stitch_exclusion_kappa"] = format_double(exclusion);
  return ComplexTrace(std::move(f), std::move(v), std::move(meta));
}

std::vector<double> unwrap_phase(std::span<const cplx> values, std::span<const double> x) {
  require(values.size() == x.size(), "unwrap needs matching lengths");
  const std::size_t n = values.size();
  std::vector<double> phi(n);
  if (n == 0) return phi;
  std::vector<double> dx;
  for (std::size_t i = 1; i < n; ++i) dx.push_back(x[i] - x[i - 1]);
  double typical = 0.0;
  if (!dx.empty()) {
    std::nth_element(dx.begin(), dx.begin() + static_cast<std::ptrdiff_t>(dx.size() / 2), dx.end());
    typical = dx[dx.size() / 2];
  }
  phi[0] = std::arg(values[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const double raw = std::arg(values[i]);
    double pred = phi[i - 1];
    const double gap = x[i] - x[i - 1];
    if (gap > 4.0 * typical && i >= 3) {
      // across a hole, extrapolate the local slope instead of holding the last value
      const std::size_t k0 = i > 16 ? i - 16 : 0;
      double mx = 0, my = 0;
      for (std::size_t k = k0; k < i; ++k) mx += x[k], my += phi[k];
      mx /= static_cast<double>(i - k0);
      my /= static_cast<double>(i - k0);
      double sxy = 0, sxx = 0;
      for (std::size_t k = k0; k < i; ++k) sxy += (x[k] - mx) * (phi[k] - my), sxx += (x[k] - mx) * (x[k] - mx);
      if (sxx > 0.0) pred = my + sxy / sxx * (x[i] - mx);
    }
    phi[i] = raw + kTwoPi * std::round((pred - raw) / kTwoPi);
  }
  return phi;
}

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct LinearMag {
  Vec coef;  // poly (t^5..t^0), then (A_k, B_k) per cosine
  double rss = 0.0;
};

class MagnitudeDesign {
 public:
  MagnitudeDesign(std::vector<double> t, std::vector<double> m) : t_(std::move(t)), m_(std::move(m)) {
    y_ = Eigen::Map<const Vec>(m_.data(), static_cast<Eigen::Index>(m_.size()));
  }

  std::size_t size() const { return t_.size(); }
  const std::vector<double>& t() const { return t_; }
  const Vec& y() const { return y_; }

  LinearMag solve(std::span<const double> freqs) const {
    const auto N = static_cast<Eigen::Index>(t_.size());
    const auto P = static_cast<Eigen::Index>(6 + 2 * freqs.size());
    Mat A(N, P);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double t = t_[static_cast<std::size_t>(i)];
      double p = 1.0;
      for (int k = 5; k >= 0; --k) {
        A(i, k) = p;
        p *= t;
      }
      for (std::size_t c = 0; c < freqs.size(); ++c) {
        A(i, static_cast<Eigen::Index>(6 + 2 * c)) = std::cos(freqs[c] * t);
        A(i, static_cast<Eigen::Index>(7 + 2 * c)) = std::sin(freqs[c] * t);
      }
    }
    LinearMag out;
    out.coef = A.colPivHouseholderQr().solve(y_);
    out.rss = (A * out.coef - y_).squaredNorm();
    return out;
  }

  Vec residual(std::span<const double> freqs, const LinearMag& fit) const {
    Vec r = y_;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      const double t = t_[i];
      double p = 0.0;
      for (int k = 0; k < 6; ++k) p = p * t + fit.coef[k];
      for (std::size_t c = 0; c < freqs.size(); ++c)
        p += fit.coef[static_cast<Eigen::Index>(6 + 2 * c)] * std::cos(freqs[c] * t) +
             fit.coef[static_cast<Eigen::Index>(7 + 2 * c)] * std::sin(freqs[c] * t);
      r[static_cast<Eigen::Index>(i)] -= p;
    }
    return r;
  }

 private:
  std::vector<double> t_;
  std::vector<double> m_;
  Vec y_;
};

// Local maxima of the residual periodogram over [b_lo, b_hi], strongest first.
std::vector<double> periodogram_peaks(const std::vector<double>& t, const Vec& r, double b_lo, double b_hi, double db,
                                      std::size_t keep) {
  const std::size_t n = t.size();
  std::vector<cplx> z(n), rot(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = std::polar(1.0, b_lo * t[i]);
    rot[i] = std::polar(1.0, db * t[i]);
  }
  std::vector<std::pair<double, double>> power;
  for (double b = b_lo; b <= b_hi; b += db) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += r[static_cast<Eigen::Index>(i)] * z[i];
      z[i] *= rot[i];
    }
    power.emplace_back(b, std::norm(acc));
  }
  std::vector<std::pair<double, double>> peaks;
  for (std::size_t k = 0; k < power.size(); ++k) {
    const bool left = k == 0 || power[k].second >= power[k - 1].second;
    const bool right = k + 1 == power.size() || power[k].second >= power[k + 1].second;
    if (left && right) peaks.push_back(power[k]);
  }
  std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<double> out;
  for (std::size_t k = 0; k < std::min(keep, peaks.size()); ++k) out.push_back(peaks[k].first);
  return out;
}

// Golden-section search of the residual sum of squares in the newest frequency.
double refine_frequency(const MagnitudeDesign& d, std::vector<double> freqs, double lo, double hi) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  auto rss = [&](double b) {
    freqs.back() = b;
    return d.solve(freqs).rss;
  };
  double a = lo, c = hi;
  double x1 = c - g * (c - a), x2 = a + g * (c - a);
  double f1 = rss(x1), f2 = rss(x2);
  for (int it = 0; it < 60 && (c - a) > 1e-10 * std::max(1.0, std::abs(c)); ++it) {
    if (f1 < f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - g * (c - a);
      f1 = rss(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (c - a);
      f2 = rss(x2);
    }
  }
  return 0.5 * (a + c);
}

}  // namespace

BackgroundFit fit_background(const ComplexTrace& stitched, const BackgroundFitOptions& opt) {
  const std::size_t n = stitched.size();
  require(n >= 30, "background fit needs at least 30 points");
  require(opt.max_cosines >= 0 && opt.max_cosines <= 2, "background model has at most two cosines");

  BackgroundFit out;
  auto& bc = out.coeffs;
  const double w_first = stitched.omega(0), w_last = stitched.omega(n - 1);
  bc.omega_ref = 0.5 * (w_first + w_last);
  bc.omega_scale = 0.5 * (w_last - w_first);

  std::vector<double> t(n), mag(n);
  double level = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = bc.normalized(stitched.omega(i));
    mag[i] = std::abs(stitched.value(i));
    level += mag[i];
  }
  level /= static_cast<double>(n);
  require(level > 0.0, "background magnitude is zero");
  const MagnitudeDesign design(t, mag);

  // cosine search range: at least half a period across the window, at least
  // four points per period
  std::vector<double> dt(n - 1);
  for (std::size_t i = 1; i < n; ++i) dt[i - 1] = t[i] - t[i - 1];
  std::nth_element(dt.begin(), dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2), dt.end());
  const double b_lo = std::numbers::pi;
  const double b_hi = std::max(b_lo, 0.5 * std::numbers::pi / dt[dt.size() / 2]);
  const double db = std::numbers::pi / 8.0;

  std::vector<double> freqs;
  LinearMag current = design.solve(freqs);
  for (int k = 0; k < opt.max_cosines; ++k) {
    const Vec r = design.residual(freqs, current);
    double best_b = 0.0;
    LinearMag best;
    best.rss = std::numeric_limits<double>::infinity();
    for (double b0 : periodogram_peaks(t, r, b_lo, b_hi, db, 4)) {
      auto trial = freqs;
      trial.push_back(b0);
      const double b = refine_frequency(design, trial, std::max(b_lo, b0 - db), b0 + db);
      trial.back() = b;
      auto fit = design.solve(trial);
      if (fit.rss < best.rss) {
        best = std::move(fit);
        best_b = b;
      }
    }
    if (!std::isfinite(best.rss)) break;
    const double dof = static_cast<double>(n) - static_cast<double>(6 + 3 * (freqs.size() + 1));
    const double f_ratio = (current.rss - best.rss) / 3.0 / std::max(best.rss / dof, 1e-300);
    const auto j = static_cast<Eigen::Index>(6 + 2 * freqs.size());
    const double amp = std::hypot(best.coef[j], best.coef[j + 1]);
    if (!(f_ratio > opt.min_f_ratio) || !(amp > opt.min_cosine_amplitude * level)) break;
    freqs.push_back(best_b);
    current = std::move(best);
  }
  // joint nonlinear refinement of amplitudes, frequencies and phases; a
  // cosine that only chases residue below the noise can stall the minimizer,
  // in which case the weakest (last added) one is dropped
  auto joint = [&](std::size_t nc) {
    std::vector<ParamSpec> init;
    const auto lin = design.solve(std::vector<double>(freqs.begin(), freqs.begin() + static_cast<std::ptrdiff_t>(nc)));
    const char* pname[6] = {"a_p", "b_p", "c_p", "d_p", "e_p", "f_p"};
    for (int k = 0; k < 6; ++k) init.push_back({pname[k], lin.coef[k], -INFINITY, INFINITY, 0.01 * level});
    for (std::size_t c = 0; c < nc; ++c) {
      const double A = lin.coef[static_cast<Eigen::Index>(6 + 2 * c)];
      const double B = lin.coef[static_cast<Eigen::Index>(7 + 2 * c)];
      const std::string s = std::to_string(c + 1);
      // each frequency stays within its own periodogram cell so two cosines
      // cannot merge into a beating pair
      double room = 0.5 * std::numbers::pi;
      for (std::size_t o = 0; o < nc; ++o)
        if (o != c) room = std::min(room, 0.5 * std::abs(freqs[o] - freqs[c]));
      init.push_back({"a" + s + "c", std::hypot(A, B), 0.0, INFINITY, 0.01 * level});
      init.push_back({"b" + s + "c", freqs[c], freqs[c] - room, freqs[c] + room, 0.01});
      init.push_back({"c" + s + "c", std::atan2(-B, A), -INFINITY, INFINITY, 0.01});
    }
    ResidualFn resid = [&](std::span<const double> p, std::span<double> r) {
      for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (int k = 0; k < 6; ++k) v = v * t[i] + p[static_cast<std::size_t>(k)];
        for (std::size_t c = 0; c < nc; ++c) v += p[6 + 3 * c] * std::cos(p[7 + 3 * c] * t[i] + p[8 + 3 * c]);
        r[i] = v - mag[i];
      }
    };
    return nlls_minimize(resid, n, init);
  };

  std::size_t nc = freqs.size();
  std::vector<double> values;
  while (nc > 0) {
    auto nl = joint(nc);
    if (nl.converged) {
      values = std::move(nl.values);
      break;
    }
    --nc;
  }
  if (nc == 0) {
    // polynomial only: the linear solution is the optimum
    const auto lin = design.solve({});
    for (int k = 0; k < 6; ++k) values.push_back(lin.coef[k]);
  }
  out.n_cosines = static_cast<int>(nc);
  for (int k = 0; k < 6; ++k) bc.poly[static_cast<std::size_t>(k)] = values[static_cast<std::size_t>(k)];
  if (nc >= 1) bc.cos1 = {values[6], values[7], values[8]};
  if (nc >= 2) bc.cos2 = {values[9], values[10], values[11]};
  for (auto* cs : {&bc.cos1, &bc.cos2}) {
    if ((*cs)[0] < 0.0) {
      (*cs)[0] = -(*cs)[0];
      (*cs)[2] += std::numbers::pi;
    }
    (*cs)[2] = std::remainder((*cs)[2], kTwoPi);
  }

  // phase: unwrap then straight line in t
  const auto phi = unwrap_phase(stitched.values(), t);
  double mt = 0, mp = 0;
  for (std::size_t i = 0; i < n; ++i) mt += t[i], mp += phi[i];
  mt /= static_cast<double>(n);
  mp /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) sxy += (t[i] - mt) * (phi[i] - mp), sxx += (t[i] - mt) * (t[i] - mt);
  bc.phase[0] = sxy / sxx;
  bc.phase[1] = mp - bc.phase[0] * mt;

  double s_mag = 0.0, s_ph = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = stitched.omega(i);
    const double rel = (bc.magnitude(w) - mag[i]) / mag[i];
    const double dph = bc.phase_at(w) - phi[i];
    s_mag += rel * rel;
    s_ph += dph * dph;
  }
  out.magnitude_rms_rel = std::sqrt(s_mag / static_cast<double>(n));
  out.phase_rms = std::sqrt(s_ph / static_cast<double>(n));
  return out;
}

ComplexTrace correct_background(const ComplexTrace& trace, const BackgroundCoeffs& b) {
  std::vector<double> f(trace.frequency().begin(), trace.frequency().end());
  std::vector<cplx> v(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const cplx bg = background_eval(trace.omega(i), b);
    if (!(std::abs(bg) >= 1e-12))
      fail(Errc::invalid_argument, "background vanishes at " + format_double(trace.frequency(i)) + " Hz");
    v[i] = trace.value(i) / bg;
  }
  Metadata meta = trace.meta();
  meta["background_corrected"] = "true";
  return ComplexTrace(std::move(f), std::move(v), std::move(meta));
}

}  // namespace fluxom
