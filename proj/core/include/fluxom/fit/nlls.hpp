#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fluxom/trace.hpp"

namespace fluxom {

struct ParamSpec {
  std::string name;
  double value = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  // Typical size of a change in this parameter; sets the internal unit.
  double scale = 1.0;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> covariance;  // row-major, names.size()^2
  double residual_norm = 0.0;      // ||r||_2
  std::size_t n_residuals = 0;
  int n_iterations = 0;
  bool converged = false;
  std::string message;

  std::size_t index(std::string_view name) const;
  bool has(std::string_view name) const;
  double value(std::string_view name) const { return values[index(name)]; }
  double sigma(std::string_view name) const;
  double cov(std::string_view a, std::string_view b) const;
  // ||r||^2 / (m - n); the variance scale used for the covariance.
  double reduced_chi2() const;
};

struct NllsOptions {
  int max_iterations = 200;
  double ftol = 1e-10;  // relative cost change on an accepted step
  double gtol = 1e-10;  // max cosine between residual and Jacobian columns
  double xtol = 1e-13;  // per-parameter step relative to 1 + abs(value), internal units
  double fd_step = 1e-6;
  double initial_radius = 100.0;  // initial trust radius on ||D step||, relative to ||r||
};

// Fills `residuals` for external parameters `params`.
using ResidualFn = std::function<void(std::span<const double> params, std::span<double> residuals)>;

/// Levenberg-Marquardt trust-region iteration with central-difference Jacobian.
/// D is the running maximum of the Jacobian column norms.
///
/// Bounds are enforced by smooth reparameterization (sine for two-sided,
/// square-root for one-sided), so the returned values never leave them.
/// Throws Errc::singular_jacobian if the Jacobian is rank deficient at the
/// initial point and Errc::invalid_argument for an init outside its bounds.
/// Running out of iterations is not an exception: the partial result is
/// returned with converged == false.
FitResult nlls_minimize(const ResidualFn& f, std::size_t n_residuals, std::vector<ParamSpec> init,
                        const NllsOptions& opt = {});

using TraceModel = std::function<cplx(double omega, std::span<const double> params)>;

// Complex trace fit: residuals are stacked (Re, Im) of model - data over the
// points where mask is true (all points when the mask is empty).
FitResult nlls_minimize(const TraceModel& model, const ComplexTrace& data, std::vector<ParamSpec> init,
                        std::span<const char> mask = {}, const NllsOptions& opt = {});

// Throws Errc::non_convergence naming `what` unless r.converged.
const FitResult& require_converged(const FitResult& r, std::string_view what);

// {"values", "sigmas", "residual_norm", "n_residuals", "n_iterations", "converged", "message"}
std::string fit_result_to_json(const FitResult& r);

}  // namespace fluxom
