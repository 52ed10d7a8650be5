#include "fluxom/error.hpp"

#include <iostream>
#include <mutex>

namespace fluxom {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::pole_proximity: return "PoleProximity";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::singular_jacobian: return "SingularJacobian";
    case Errc::no_dip_found: return "NoDipFound";
    case Errc::no_transparency_window: return "NoTransparencyWindow";
    case Errc::collinear_points: return "CollinearPoints";
    case Errc::grid_mismatch: return "GridMismatch";
    case Errc::parse_error: return "ParseError";
    case Errc::validation_error: return "ValidationError";
    case Errc::io_error: return "IoError";
    case Errc::missing_metadata: return "MissingMetadata";
  }
  return "Unknown";
}

namespace {

std::string compose(Errc code, const std::string& message, const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += std::string(to_string(code));
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(Errc code, const std::string& message, std::string stage)
    : std::runtime_error(compose(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

bool Error::is_convergence_failure() const noexcept {
  switch (code_) {
    case Errc::non_convergence:
    case Errc::singular_jacobian:
    case Errc::no_dip_found:
    case Errc::no_transparency_window:
    case Errc::collinear_points:
      return true;
    default:
      return false;
  }
}

namespace {

std::mutex warn_mutex;
WarningHandler warn_handler = [](std::string_view m) { std::cerr << "warning: " << m << '\n'; };

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warn_mutex);
  std::swap(handler, warn_handler);
  return handler;
}

void warn(std::string_view message) {
  std::lock_guard lock(warn_mutex);
  if (warn_handler) warn_handler(message);
}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace fluxom
