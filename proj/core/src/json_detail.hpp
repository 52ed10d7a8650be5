#pragma once

#include <json.hpp>

#include "fluxom/fit/nlls.hpp"
#include "fluxom/synth.hpp"

namespace fluxom::detail {

using nlohmann::json;

inline json background_to_json(const BackgroundCoeffs& b) {
  return json{{"poly", b.poly},   {"cos1", b.cos1},           {"cos2", b.cos2},
              {"phase", b.phase}, {"omega_ref", b.omega_ref}, {"omega_scale", b.omega_scale}};
}

inline json fit_to_json(const FitResult& r) {
  json values = json::object(), sigmas = json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    values[r.names[i]] = r.values[i];
    sigmas[r.names[i]] = r.sigma(r.names[i]);
  }
  return json{{"values", values},
              {"sigmas", sigmas},
              {"residual_norm", r.residual_norm},
              {"n_residuals", r.n_residuals},
              {"n_iterations", r.n_iterations},
              {"converged", r.converged},
              {"message", r.message}};
}

}  // namespace fluxom::detail
