#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;
using doctest::Approx;
using nlohmann::json;

namespace {

const std::string kExe = FLUXOM_EXE;
const fs::path kData = FLUXOM_DATA_DIR;

const fs::path kScratch = fs::temp_directory_path() / ("fluxom_cli_" + std::to_string(::getpid()));

struct Cleanup {
  ~Cleanup() {
    std::error_code ec;
    fs::remove_all(kScratch, ec);
  }
} cleanup;

fs::path scratch(const std::string& name) {
  const fs::path p = kScratch / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args, const fs::path& out = {}) {
  std::string cmd = kExe + " " + args;
  cmd += out.empty() ? " > /dev/null 2>&1" : " > '" + out.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    FAIL("no column " << name);
    return 0;
  }
  std::vector<double> numbers(const std::string& name) const {
    std::vector<double> v;
    const auto c = col(name);
    for (const auto& r : rows) v.push_back(std::stod(r.at(c)));
    return v;
  }
};

Table read_csv(const fs::path& p) {
  std::ifstream is(p);
  Table t;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (t.header.empty()) {
      t.header = cells;
    } else {
      t.rows.push_back(cells);
    }
  }
  return t;
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy * sxy / (sxx * syy);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("input errors exit with 1") {
    const auto dir = scratch("input");
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("simulate --scenario /nonexistent.json -o " + dir.string()) == 1);
    std::ofstream(dir / "bad.json") << R"({"device": {"mech": {"mass_kg": -1}}, "calibration": {}})";
    CHECK(run("-c " + (dir / "bad.json").string() + " sweep --axis flux --from 0.2 --to 1 --steps 2") == 1);
    CHECK(run("sweep --axis flux --from 0.2 --to 1 --steps 0") == 1);
    CHECK(run("pipeline -d " + dir.string()) == 1);
  }

  TEST_CASE("a trace without a dip is a convergence failure") {
    const auto dir = scratch("nodip");
    std::ofstream os(dir / "flat.csv");
    os << "freq_hz,re,im\n";
    for (int i = 0; i < 50; ++i) os << 5.1e9 + i * 1e6 << ",1,0\n";
    os.close();
    CHECK(run("fit -m cavity -t " + (dir / "flat.csv").string()) == 2);
  }

  TEST_CASE("a sweep row lost in the noise marks the run as failed") {
    const auto dir = scratch("lost");
    CHECK(run("sweep --axis flux --from 0.5 --to 1.4 --steps 2 --sigma 0.01 --seed 4 -o " + (dir / "s.csv").string()) == 2);
    const auto t = read_csv(dir / "s.csv");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].back() == "NoTransparencyWindow");
    CHECK(t.rows[1].back() == "ok");
  }

  TEST_CASE("field sweep gives g0 linear in the field") {
    const auto dir = scratch("bsweep");
    REQUIRE(run("sweep --axis b_parallel --from 1e-3 --to 10e-3 --steps 10 -o " + (dir / "b.csv").string()) == 0);
    const auto t = read_csv(dir / "b.csv");
    REQUIRE(t.rows.size() == 10);
    CHECK(r_squared(t.numbers("setpoint"), t.numbers("g0_recovered_hz")) > 0.999);
    for (const auto& r : t.rows) CHECK(r.back() == "ok");
  }

  TEST_CASE("flux sweep grows with responsivity") {
    const auto dir = scratch("fsweep");
    REQUIRE(run("sweep --axis flux --from 0.2 --to 1.5 --steps 8 -o " + (dir / "f.csv").string()) == 0);
    const auto t = read_csv(dir / "f.csv");
    REQUIRE(t.rows.size() == 8);
    const auto resp = t.numbers("responsivity_hz_per_phi0");
    const auto g0 = t.numbers("g0_recovered_hz");
    for (std::size_t i = 1; i < g0.size(); ++i) {
      CHECK(resp[i] > resp[i - 1]);
      CHECK(g0[i] > g0[i - 1]);
    }
  }

  TEST_CASE("simulate then pipeline recovers g0") {
    const auto dir = scratch("roundtrip");
    REQUIRE(run("simulate -s " + (kData / "scenarios" / "omit.json").string() + " --sigma 0 -o " + dir.string()) == 0);
    for (const char* f : {"background_lo.csv", "background_hi.csv", "cavity.csv", "omit.csv", "truth.json"})
      CHECK(fs::exists(dir / f));
    REQUIRE(run("pipeline -d " + dir.string() + " -o " + (dir / "report.json").string()) == 0);
    const auto truth = json::parse(slurp(dir / "truth.json"));
    const auto rep = json::parse(slurp(dir / "report.json"));
    CHECK(rep.at("g0_hz").get<double>() == Approx(truth.at("g0_hz").get<double>()).epsilon(5e-3));
  }

  TEST_CASE("fit verb writes parameters") {
    const auto dir = scratch("fit");
    REQUIRE(run("simulate -s " + (kData / "scenarios" / "cavity.json").string() + " -o " + dir.string()) == 0);
    REQUIRE(run("fit -m cavity -t " + (dir / "trace.csv").string() + " -o " + (dir / "fit.json").string()) == 0);
    const auto j = json::parse(slurp(dir / "fit.json"));
    CHECK(j.at("converged").get<bool>());
    CHECK(j.at("values").contains("kappa"));
  }

  TEST_CASE("reruns are byte identical") {
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    for (const auto& d : {a, b}) {
      REQUIRE(run("simulate -s " + (kData / "scenarios" / "omit.json").string() + " -o " + d.string()) == 0);
      REQUIRE(run("pipeline -d " + d.string() + " -o " + (d / "report.json").string()) == 0);
      REQUIRE(run("sweep --axis flux --from 1.2 --to 1.45 --steps 3 --sigma 0.01 --seed 4 -o " + (d / "s.csv").string()) == 0);
    }
    for (const char* f : {"background_lo.csv", "background_hi.csv", "cavity.csv", "omit.csv", "truth.json", "report.json", "s.csv"}) {
      CAPTURE(f);
      CHECK(slurp(a / f) == slurp(b / f));
    }
  }

  TEST_CASE("selftest runs chosen criteria") {
    const auto dir = scratch("selftest");
    CHECK(run("selftest --criteria 2 13 --brief", dir / "out.txt") == 0);
    const auto out = slurp(dir / "out.txt");
    CHECK(out.find("PASS") != std::string::npos);
    CHECK(out.find("FAIL") == std::string::npos);
  }
}
