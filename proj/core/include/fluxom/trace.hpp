#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fluxom {

using cplx = std::complex<double>;
using Metadata = std::map<std::string, std::string>;

// Frequency grid in cyclic Hz with complex transmission per point. Grid is
// strictly ascending, at least two points, all values finite.
class ComplexTrace {
 public:
  ComplexTrace(std::vector<double> frequency_hz, std::vector<cplx> values, Metadata meta = {});

  std::size_t size() const noexcept { return frequency_.size(); }
  std::span<const double> frequency() const noexcept { return frequency_; }
  std::span<const cplx> values() const noexcept { return values_; }
  double frequency(std::size_t i) const { return frequency_[i]; }
  double omega(std::size_t i) const;
  const cplx& value(std::size_t i) const { return values_[i]; }

  std::vector<double> angular_frequency() const;

  const Metadata& meta() const noexcept { return meta_; }
  Metadata& meta() noexcept { return meta_; }
  void set_meta(const std::string& key, const std::string& value) { meta_[key] = value; }
  void set_meta(const std::string& key, double value);
  std::optional<std::string> find_meta(const std::string& key) const;
  std::optional<double> meta_double(const std::string& key) const;

  // Points with f_lo <= f <= f_hi (Hz). Throws if fewer than two remain.
  ComplexTrace slice(double f_lo_hz, double f_hi_hz) const;

  friend bool operator==(const ComplexTrace&, const ComplexTrace&) = default;

 private:
  std::vector<double> frequency_;
  std::vector<cplx> values_;
  Metadata meta_;
};

std::string format_double(double v);

void write_trace_csv(std::ostream& os, const ComplexTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const ComplexTrace& trace);
ComplexTrace read_trace_csv(std::istream& is);
ComplexTrace read_trace_csv(const std::filesystem::path& path);

// Evenly spaced cyclic-frequency grid.
std::vector<double> linear_grid(double f_start_hz, double f_stop_hz, std::size_t n_points);

}  // namespace fluxom
