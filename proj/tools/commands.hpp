#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fluxom/config.hpp"

namespace fluxom::cli {

// Exit statuses shared by every verb.
enum Status : int { ok = 0, input_error = 1, convergence_failure = 2 };

struct SimulateArgs {
  std::filesystem::path scenario;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma;
};

struct FitArgs {
  std::filesystem::path trace;
  std::string model = "cavity";
  std::vector<std::string> cuts;  // "lo:hi" in Hz
  std::filesystem::path out;      // empty: stdout
};

struct PipelineArgs {
  std::filesystem::path dir;
  std::filesystem::path background_lo, background_hi, cavity, omit;
  std::vector<std::filesystem::path> flux_sweep;
  std::optional<double> flux_phi0;
  int refinements = 2;
  bool include_fits = true;
  std::filesystem::path out;
};

struct SweepArgs {
  std::string axis;  // flux | b_parallel
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  std::optional<double> flux_phi0;    // fixed flux on the b_parallel axis
  std::optional<double> b_parallel;   // fixed field on the flux axis
  double sigma = 0.0;
  std::uint64_t seed = 1;
  double ripple_db = 0.0;
  double stiffening_scale = 0.52;
  int jobs = 0;  // 0: hardware concurrency
  std::filesystem::path out;
};

struct SelftestArgs {
  std::vector<int> criteria;  // empty: all
  bool brief = false;
};

int simulate(const SimulateArgs& a, const Config& cfg);
int fit(const FitArgs& a, const Config& cfg);
int pipeline(const PipelineArgs& a, const Config& cfg);
int sweep(const SweepArgs& a, const Config& cfg);
int selftest(const SelftestArgs& a, const Config& cfg);

}  // namespace fluxom::cli
