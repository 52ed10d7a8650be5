#include "fluxom/fit/circle.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fluxom/error.hpp"

namespace fluxom {

CircleFit fit_circle(std::span<const cplx> points) {
  const std::size_t n = points.size();
  if (n < 3) fail(Errc::collinear_points, "circle fit needs at least three points");

  // work in coordinates centred on the mean and scaled by the RMS spread
  cplx mean = 0.0;
  for (const auto& z : points) mean += z;
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (const auto& z : points) spread += std::norm(z - mean);
  spread = std::sqrt(spread / static_cast<double>(n));
  if (!(spread > 0.0)) fail(Errc::collinear_points, "all points coincide");

  std::vector<cplx> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = (points[i] - mean) / spread;

  // collinearity: smallest principal axis of the scatter
  Eigen::Matrix2d S = Eigen::Matrix2d::Zero();
  for (const auto& z : q) {
    S(0, 0) += z.real() * z.real();
    S(0, 1) += z.real() * z.imag();
    S(1, 1) += z.imag() * z.imag();
  }
  S(1, 0) = S(0, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
  if (es.eigenvalues()[0] <= 1e-20 * es.eigenvalues()[1]) fail(Errc::collinear_points, "points are collinear");

  // x^2 + y^2 + D x + E y + F = 0
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    A(k, 0) = q[i].real();
    A(k, 1) = q[i].imag();
    A(k, 2) = 1.0;
    b[k] = -std::norm(q[i]);
  }
  const Eigen::Vector3d s = A.colPivHouseholderQr().solve(b);
  const cplx c0(-0.5 * s[0], -0.5 * s[1]);
  const double r2 = std::norm(c0) - s[2];
  if (!(r2 > 0.0) || !std::isfinite(r2)) fail(Errc::collinear_points, "points do not define a circle");
  const double r0 = std::sqrt(r2);

  ResidualFn f = [&](std::span<const double> p, std::span<double> res) {
    const cplx c(p[0], p[1]);
    for (std::size_t i = 0; i < n; ++i) res[i] = std::abs(q[i] - c) - p[2];
  };
  auto fit = nlls_minimize(f, n, {{"xc", c0.real(), -INFINITY, INFINITY, 0.01 * r0},
                                  {"yc", c0.imag(), -INFINITY, INFINITY, 0.01 * r0},
                                  {"r", r0, 0.0, INFINITY, 0.01 * r0}});
  require_converged(fit, "circle fit");

  // Gauss-Newton polish with the analytic Jacobian, so the result is the
  // stationary point itself rather than wherever the tolerances stopped
  Eigen::Vector3d p(fit.values[0], fit.values[1], fit.values[2]);
  Eigen::MatrixXd J(n, 3);
  Eigen::VectorXd res(n);
  double last = INFINITY;
  for (int it = 0; it < 100; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const cplx d = q[i] - cplx(p[0], p[1]);
      const double a = std::abs(d);
      res[k] = a - p[2];
      J(k, 0) = -d.real() / a;
      J(k, 1) = -d.imag() / a;
      J(k, 2) = -1.0;
    }
    const Eigen::Vector3d step = J.colPivHouseholderQr().solve(-res);
    const double size = step.norm();
    if (!std::isfinite(size) || size >= last) break;
    p += step;
    last = size;
    if (size <= 1e-16 * p[2]) break;
  }
  fit.values = {p[0], p[1], p[2]};

  CircleFit out;
  out.center = mean + spread * cplx(fit.values[0], fit.values[1]);
  out.diameter = 2.0 * spread * fit.values[2];
  out.rms_radial_residual = spread * fit.residual_norm / std::sqrt(static_cast<double>(n));
  out.sigma_diameter = 2.0 * spread * fit.sigma("r");
  return out;
}

}  // namespace fluxom
