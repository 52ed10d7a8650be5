#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fluxom {

enum class Errc {
  invalid_argument,
  pole_proximity,
  non_convergence,
  singular_jacobian,
  no_dip_found,
  no_transparency_window,
  collinear_points,
  grid_mismatch,
  parse_error,
  validation_error,
  io_error,
  missing_metadata,
};

std::string_view to_string(Errc code);

// Every failure in the library is reported through this type. `stage` is set
// by the g0 pipeline so callers can tell which step gave up.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string stage = {});

  Errc code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  Error with_stage(std::string stage) const;

  // Convergence failures map to exit status 2 at the CLI, everything else to 1.
  bool is_convergence_failure() const noexcept;

 private:
  Errc code_;
  std::string stage_;
  std::string detail_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

// Non-fatal diagnostics. The default handler writes one line to stderr;
// pass an empty function to silence.
using WarningHandler = std::function<void(std::string_view)>;
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(Errc::invalid_argument, message);
}

}  // namespace fluxom
