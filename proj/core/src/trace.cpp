#include "fluxom/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "fluxom/error.hpp"
#include "fluxom/units.hpp"

namespace fluxom {

ComplexTrace::ComplexTrace(std::vector<double> frequency_hz, std::vector<cplx> values, Metadata meta)
    : frequency_(std::move(frequency_hz)), values_(std::move(values)), meta_(std::move(meta)) {
  require(frequency_.size() == values_.size(), "trace frequency and value arrays differ in length");
  require(frequency_.size() >= 2, "trace needs at least two points");
  for (std::size_t i = 0; i < frequency_.size(); ++i) {
    require(std::isfinite(frequency_[i]), "trace frequency must be finite");
    require(std::isfinite(values_[i].real()) && std::isfinite(values_[i].imag()),
            "trace value must be finite");
    if (i > 0) require(frequency_[i] > frequency_[i - 1], "trace frequency must be strictly ascending");
  }
}

double ComplexTrace::omega(std::size_t i) const { return hz_to_angular(frequency_[i]); }

std::vector<double> ComplexTrace::angular_frequency() const {
  std::vector<double> out(frequency_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = hz_to_angular(frequency_[i]);
  return out;
}

void ComplexTrace::set_meta(const std::string& key, double value) { meta_[key] = format_double(value); }

std::optional<std::string> ComplexTrace::find_meta(const std::string& key) const {
  auto it = meta_.find(key);
  if (it == meta_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> ComplexTrace::meta_double(const std::string& key) const {
  auto s = find_meta(key);
  if (!s) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc{} || ptr != s->data() + s->size()) return std::nullopt;
  return v;
}

ComplexTrace ComplexTrace::slice(double f_lo_hz, double f_hi_hz) const {
  std::vector<double> f;
  std::vector<cplx> v;
  for (std::size_t i = 0; i < size(); ++i) {
    if (frequency_[i] >= f_lo_hz && frequency_[i] <= f_hi_hz) {
      f.push_back(frequency_[i]);
      v.push_back(values_[i]);
    }
  }
  if (f.size() < 2) fail(Errc::invalid_argument, "slice leaves fewer than two points");
  return ComplexTrace(std::move(f), std::move(v), meta_);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) fail(Errc::io_error, "number formatting failed");
  return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& os, const ComplexTrace& trace) {
  for (const auto& [key, value] : trace.meta()) os << "# " << key << '=' << value << '\n';
  os << "freq_hz,re,im\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    os << format_double(trace.frequency(i)) << ',' << format_double(trace.value(i).real()) << ','
       << format_double(trace.value(i).imag()) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const ComplexTrace& trace) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Errc::io_error, "cannot open " + path.string() + " for writing");
  write_trace_csv(os, trace);
  if (!os) fail(Errc::io_error, "write failed for " + path.string());
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line_no) {
  field = trim(field);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    fail(Errc::parse_error, "line " + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
  return v;
}

}  // namespace

ComplexTrace read_trace_csv(std::istream& is) {
  Metadata meta;
  std::vector<double> f;
  std::vector<cplx> v;
  bool header_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (s.empty()) continue;
    if (!header_seen) {
      if (s.front() == '#') {
        s.remove_prefix(1);
        s = trim(s);
        auto eq = s.find('=');
        if (eq == std::string_view::npos)
          fail(Errc::parse_error, "line " + std::to_string(line_no) + ": metadata without '='");
        meta[std::string(trim(s.substr(0, eq)))] = std::string(trim(s.substr(eq + 1)));
        continue;
      }
      if (s != "freq_hz,re,im")
        fail(Errc::parse_error, "line " + std::to_string(line_no) + ": expected header 'freq_hz,re,im'");
      header_seen = true;
      continue;
    }
    auto c1 = s.find(',');
    auto c2 = c1 == std::string_view::npos ? c1 : s.find(',', c1 + 1);
    if (c2 == std::string_view::npos || s.find(',', c2 + 1) != std::string_view::npos)
      fail(Errc::parse_error, "line " + std::to_string(line_no) + ": expected three columns");
    f.push_back(parse_number(s.substr(0, c1), line_no));
    double re = parse_number(s.substr(c1 + 1, c2 - c1 - 1), line_no);
    double im = parse_number(s.substr(c2 + 1), line_no);
    v.emplace_back(re, im);
  }
  if (!header_seen) fail(Errc::parse_error, "missing 'freq_hz,re,im' header");
  return ComplexTrace(std::move(f), std::move(v), std::move(meta));
}

ComplexTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Errc::io_error, "cannot open " + path.string());
  return read_trace_csv(is);
}

std::vector<double> linear_grid(double f_start_hz, double f_stop_hz, std::size_t n_points) {
  require(n_points >= 2, "grid needs at least two points");
  require(f_stop_hz > f_start_hz, "grid stop must exceed start");
  std::vector<double> out(n_points);
  const double step = (f_stop_hz - f_start_hz) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) out[i] = f_start_hz + step * static_cast<double>(i);
  out.back() = f_stop_hz;
  return out;
}

}  // namespace fluxom
