#include "fluxom/fit/nlls.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fluxom/error.hpp"
#include "../json_detail.hpp"

namespace fluxom {

std::size_t FitResult::index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  fail(Errc::invalid_argument, "fit result has no parameter '" + std::string(name) + "'");
}

bool FitResult::has(std::string_view name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

double FitResult::sigma(std::string_view name) const {
  const auto i = index(name);
  return std::sqrt(std::max(0.0, covariance[i * names.size() + i]));
}

double FitResult::cov(std::string_view a, std::string_view b) const {
  return covariance[index(a) * names.size() + index(b)];
}

double FitResult::reduced_chi2() const {
  const auto n = names.size();
  if (n_residuals <= n) return 0.0;
  return residual_norm * residual_norm / static_cast<double>(n_residuals - n);
}

std::string fit_result_to_json(const FitResult& r) { return detail::fit_to_json(r).dump(2); }

const FitResult& require_converged(const FitResult& r, std::string_view what) {
  if (!r.converged)
    fail(Errc::non_convergence, std::string(what) + " did not converge after " + std::to_string(r.n_iterations) +
                                    " iterations (" + r.message + ")");
  return r;
}

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Internal <-> external mapping for one parameter.
struct Transform {
  enum Kind { free, lower, upper, both } kind = free;
  double lo = 0.0, hi = 0.0, origin = 0.0, scale = 1.0;

  double to_external(double u) const {
    switch (kind) {
      case free: return origin + scale * u;
      case lower: return lo + scale * (std::sqrt(u * u + 1.0) - 1.0);
      case upper: return hi - scale * (std::sqrt(u * u + 1.0) - 1.0);
      case both: return lo + 0.5 * (hi - lo) * (std::sin(u) + 1.0);
    }
    return 0.0;
  }
  double to_internal(double p) const {
    switch (kind) {
      case free: return (p - origin) / scale;
      case lower: {
        const double a = (p - lo) / scale + 1.0;
        return std::sqrt(std::max(0.0, a * a - 1.0));
      }
      case upper: {
        const double a = (hi - p) / scale + 1.0;
        return std::sqrt(std::max(0.0, a * a - 1.0));
      }
      case both: return std::asin(std::clamp(2.0 * (p - lo) / (hi - lo) - 1.0, -1.0, 1.0));
    }
    return 0.0;
  }
  double derivative(double u) const {
    switch (kind) {
      case free: return scale;
      case lower: return scale * u / std::sqrt(u * u + 1.0);
      case upper: return -scale * u / std::sqrt(u * u + 1.0);
      case both: return 0.5 * (hi - lo) * std::cos(u);
    }
    return 0.0;
  }
};

Transform make_transform(const ParamSpec& p) {
  require(std::isfinite(p.value), "initial value of '" + p.name + "' is not finite");
  require(p.scale > 0.0 && std::isfinite(p.scale), "scale of '" + p.name + "' must be positive");
  require(!(p.lower > p.upper), "bounds of '" + p.name + "' are inverted");
  if (p.value < p.lower || p.value > p.upper)
    fail(Errc::invalid_argument, "initial value of '" + p.name + "' is outside its bounds");
  Transform t;
  t.scale = p.scale;
  t.origin = p.value;
  const bool has_lo = std::isfinite(p.lower);
  const bool has_hi = std::isfinite(p.upper);
  if (has_lo && has_hi) {
    require(p.upper > p.lower, "bounds of '" + p.name + "' have zero width");
    t.kind = Transform::both;
  } else if (has_lo) {
    t.kind = Transform::lower;
  } else if (has_hi) {
    t.kind = Transform::upper;
  }
  t.lo = p.lower;
  t.hi = p.upper;
  return t;
}

// Keeps the starting point off a bound, where the transforms have zero slope.
double interior_start(const Transform& t, double p) {
  const double margin = 1e-6;
  switch (t.kind) {
    case Transform::free: return p;
    case Transform::lower: return std::max(p, t.lo + margin * t.scale);
    case Transform::upper: return std::min(p, t.hi - margin * t.scale);
    case Transform::both: {
      const double w = t.hi - t.lo;
      return std::clamp(p, t.lo + margin * w, t.hi - margin * w);
    }
  }
  return p;
}

class Problem {
 public:
  Problem(const ResidualFn& f, std::size_t m, std::vector<Transform> tr)
      : f_(f), m_(m), tr_(std::move(tr)), ext_(tr_.size()) {}

  std::size_t m() const { return m_; }
  std::size_t n() const { return tr_.size(); }

  void external(const Vec& u, std::vector<double>& p) const {
    for (std::size_t j = 0; j < n(); ++j) p[j] = tr_[j].to_external(u[static_cast<Eigen::Index>(j)]);
  }

  bool residuals(const Vec& u, Vec& r) {
    external(u, ext_);
    r.resize(static_cast<Eigen::Index>(m_));
    f_(ext_, std::span<double>(r.data(), m_));
    return r.allFinite();
  }

  bool jacobian(const Vec& u, double rel, Mat& J) {
    J.resize(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n()));
    Vec up = u, rp, rm;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n()); ++j) {
      const double h = rel * std::max(1.0, std::abs(u[j]));
      up[j] = u[j] + h;
      if (!residuals(up, rp)) return false;
      up[j] = u[j] - h;
      if (!residuals(up, rm)) return false;
      up[j] = u[j];
      J.col(j) = (rp - rm) / (2.0 * h);
    }
    return true;
  }

  const Transform& transform(std::size_t j) const { return tr_[j]; }

 private:
  const ResidualFn& f_;
  std::size_t m_;
  std::vector<Transform> tr_;
  std::vector<double> ext_;
};

void check_rank(const Mat& J, const std::vector<ParamSpec>& specs) {
  const Eigen::Index n = J.cols();
  Mat Jn = J;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double c = Jn.col(j).norm();
    if (!(c > 0.0))
      fail(Errc::singular_jacobian,
           "model does not depend on '" + specs[static_cast<std::size_t>(j)].name + "' at the initial point");
    Jn.col(j) /= c;
  }
  Eigen::ColPivHouseholderQR<Mat> qr(Jn);
  qr.setThreshold(1e-9);
  if (qr.rank() < n) {
    const auto& perm = qr.colsPermutation().indices();
    const auto culprit = static_cast<std::size_t>(perm[qr.rank()]);
    fail(Errc::singular_jacobian, "Jacobian is rank deficient at the initial point (rank " +
                                      std::to_string(qr.rank()) + " of " + std::to_string(n) +
                                      "; degenerate direction involves '" + specs[culprit].name + "')");
  }
}

// Step restricted to ||D d|| <= radius. Inside the radius this is the
// Gauss-Newton step; otherwise d(mu) minimizes ||J d + r||^2 + mu ||D d||^2
// with mu chosen so that ||D d|| is within 10% of the radius.
struct TrustStep {
  Vec d;
  double scaled_norm = 0.0;
  double mu = 0.0;
};

class StepSolver {
 public:
  StepSolver(const Mat& J, const Vec& r, const Vec& D) : Dinv_(D.cwiseInverse()) {
    const Mat Js = J * Dinv_.asDiagonal();
    Eigen::JacobiSVD<Mat> svd(Js, Eigen::ComputeThinU | Eigen::ComputeThinV);
    s_ = svd.singularValues();
    V_ = svd.matrixV();
    c_ = svd.matrixU().transpose() * r;
    cut_ = std::numeric_limits<double>::epsilon() * static_cast<double>(J.rows()) * (s_.size() ? s_[0] : 0.0);
  }

  TrustStep solve(double radius, double mu_hint) const {
    TrustStep gn = at(0.0);
    if (gn.scaled_norm <= radius) return gn;
    // ||D d(mu)|| falls monotonically in mu; bracket, then bisect in log mu
    double lo = 0.0, hi = std::max(mu_hint, 1e-300);
    while (at(hi).scaled_norm > radius) {
      lo = hi;
      hi *= 10.0;
    }
    if (lo == 0.0) {
      lo = hi;
      for (int k = 0; k < 100 && at(lo).scaled_norm <= radius; ++k) lo *= 1e-3;
    }
    TrustStep best = at(hi);
    for (int k = 0; k < 200 && best.scaled_norm < 0.9 * radius; ++k) {
      const double mid = std::sqrt(lo * hi);
      TrustStep t = at(mid);
      if (t.scaled_norm > radius) {
        lo = mid;
      } else {
        hi = mid;
        best = std::move(t);
      }
      if (hi / lo < 1.0 + 1e-12) break;
    }
    return best;
  }

 private:
  TrustStep at(double mu) const {
    Vec w(s_.size());
    for (Eigen::Index i = 0; i < s_.size(); ++i) {
      const double si = s_[i];
      w[i] = (mu == 0.0 && si <= cut_) ? 0.0 : -si * c_[i] / (si * si + mu);
    }
    const Vec q = V_ * w;
    return {Dinv_.cwiseProduct(q), q.norm(), mu};
  }

  Vec Dinv_, s_, c_;
  Mat V_;
  double cut_ = 0.0;
};

}  // namespace

FitResult nlls_minimize(const ResidualFn& f, std::size_t n_residuals, std::vector<ParamSpec> init,
                        const NllsOptions& opt) {
  require(!init.empty(), "no parameters to fit");
  require(n_residuals >= init.size(), "fewer residuals than parameters");

  std::vector<Transform> tr;
  tr.reserve(init.size());
  for (auto& p : init) {
    tr.push_back(make_transform(p));
    p.value = interior_start(tr.back(), p.value);
  }
  const std::size_t n = init.size();
  const auto N = static_cast<Eigen::Index>(n);
  Problem prob(f, n_residuals, tr);

  Vec u(N);
  for (std::size_t j = 0; j < n; ++j) u[static_cast<Eigen::Index>(j)] = tr[j].to_internal(init[j].value);

  Vec r, r_new;
  if (!prob.residuals(u, r)) fail(Errc::invalid_argument, "model is not finite at the initial point");
  Mat J;
  if (!prob.jacobian(u, opt.fd_step, J)) fail(Errc::invalid_argument, "model is not finite near the initial point");
  check_rank(J, init);

  double cost = 0.5 * r.squaredNorm();
  Vec D = J.colwise().norm().transpose();
  double radius = opt.initial_radius * std::sqrt(2.0 * cost);
  double mu = 1.0;

  FitResult out;
  out.n_residuals = n_residuals;
  int it = 0;
  bool done = false;
  bool need_jacobian = false;
  while (!done && it < opt.max_iterations) {
    if (need_jacobian) {
      if (!prob.jacobian(u, opt.fd_step, J)) {
        out.message = "model became non-finite";
        break;
      }
      D = D.cwiseMax(J.colwise().norm().transpose());
      need_jacobian = false;
    }
    if (cost == 0.0) {
      out.converged = true;
      out.message = "zero residual";
      break;
    }
    const Vec g = J.transpose() * r;
    const double rn = r.norm();
    double gcos = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      const double cn = J.col(j).norm();
      if (cn > 0.0) gcos = std::max(gcos, std::abs(g[j]) / (cn * rn));
    }
    if (gcos < opt.gtol) {
      out.converged = true;
      out.message = "gradient below tolerance";
      break;
    }

    ++it;
    const StepSolver solver(J, r, D);
    bool accepted = false;
    while (!accepted) {
      const TrustStep ts = solver.solve(radius, mu);
      const Vec& step = ts.d;
      if ((step.array().abs() <= opt.xtol * (u.array().abs() + 1.0)).all()) {
        out.converged = true;
        out.message = "step below tolerance";
        done = true;
        break;
      }
      if (ts.mu > 0.0) mu = ts.mu;
      const Vec u_new = u + step;
      double cost_new = std::numeric_limits<double>::infinity();
      if (prob.residuals(u_new, r_new)) cost_new = 0.5 * r_new.squaredNorm();
      const double predicted = cost - 0.5 * (r + J * step).squaredNorm();
      const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : -1.0;

      if (rho < 0.25) {
        radius = 0.5 * std::min(radius, ts.scaled_norm);
      } else if (rho > 0.75 || ts.mu == 0.0) {
        radius = std::max(radius, 2.0 * ts.scaled_norm);
      }
      if (rho > 1e-4) {
        const double rel = (cost - cost_new) / cost;
        u = u_new;
        r.swap(r_new);
        cost = cost_new;
        accepted = true;
        need_jacobian = true;
        if (rel < opt.ftol) {
          out.converged = true;
          out.message = "relative cost change below tolerance";
          done = true;
        }
      } else if (!(radius > 0.0)) {
        // no downhill step exists at working precision
        out.converged = true;
        out.message = "no further decrease possible";
        done = true;
        break;
      }
    }
  }
  if (!done && !out.converged && out.message.empty()) out.message = "iteration limit reached";
  if (need_jacobian) prob.jacobian(u, opt.fd_step, J);

  out.n_iterations = it;
  out.residual_norm = r.norm();
  out.names.reserve(n);
  out.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.names.push_back(init[j].name);
  prob.external(u, out.values);

  // covariance: s^2 (J^T J)^-1 mapped to external parameters
  out.covariance.assign(n * n, 0.0);
  if (J.allFinite()) {
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    const double cutoff = 1e-12 * (s.size() ? s[0] : 0.0);
    Vec inv2 = Vec::Zero(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (s[k] > cutoff) inv2[k] = 1.0 / (s[k] * s[k]);
    const Mat V = svd.matrixV();
    const Mat Cu = V * inv2.asDiagonal() * V.transpose();
    const double s2 = out.reduced_chi2();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        const auto A = static_cast<Eigen::Index>(a), B = static_cast<Eigen::Index>(b);
        out.covariance[a * n + b] =
            s2 * Cu(A, B) * prob.transform(a).derivative(u[A]) * prob.transform(b).derivative(u[B]);
      }
  }
  return out;
}

FitResult nlls_minimize(const TraceModel& model, const ComplexTrace& data, std::vector<ParamSpec> init,
                        std::span<const char> mask, const NllsOptions& opt) {
  require(mask.empty() || mask.size() == data.size(), "mask length must match the trace");
  std::vector<double> omega;
  std::vector<cplx> y;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    omega.push_back(data.omega(i));
    y.push_back(data.value(i));
  }
  require(2 * omega.size() >= init.size(), "too few unmasked points for the number of parameters");
  ResidualFn f = [&](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < omega.size(); ++i) {
      const cplx d = model(omega[i], p) - y[i];
      r[2 * i] = d.real();
      r[2 * i + 1] = d.imag();
    }
  };
  return nlls_minimize(f, 2 * omega.size(), std::move(init), opt);
}

}  // namespace fluxom
