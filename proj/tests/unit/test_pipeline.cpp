#include <cmath>
#include <json.hpp>
#include <random>

#include "doctest.h"
#include "fluxom/error.hpp"
#include "fluxom/fit/pipeline.hpp"
#include "fluxom/synth.hpp"

using namespace fluxom;
using doctest::Approx;

namespace {

constexpr double k2pi = 2.0 * M_PI;

const std::vector<double>& wide_grid() {
  static const auto g = linear_grid(5.10e9, 5.28e9, 1201);
  return g;
}

OmitScenario scenario_at(const DeviceParams& dev, double responsivity_mhz) {
  OmitScenario o;
  const auto phi = flux_for_responsivity(k2pi * responsivity_mhz * 1e6 / kPhi0, dev.squid_at_field());
  REQUIRE(phi.has_value());
  o.flux_phi0 = *phi / kPhi0;
  return o;
}

PipelineInputs inputs(const OmitSet& s) { return {s.background_lo, s.background_hi, s.cavity, s.omit, {}, {}}; }

DeviceParams paper_device() {
  DeviceParams d;
  d.b_parallel = 0.01;
  return d;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("noiseless round trip over random devices") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> B(3e-3, 15e-3), resp(30.0, 70.0), mass(0.8, 1.2), kappa(6e6, 12e6);
    for (int k = 0; k < 6; ++k) {
      auto dev = paper_device();
      dev.b_parallel = B(rng);
      dev.mech.mass *= mass(rng);
      auto o = scenario_at(dev, resp(rng));
      o.kappa_hz = kappa(rng);
      const auto set = synthesize_omit_set(o, dev, BackgroundCoeffs{}, {}, wide_grid());
      const auto r = run_g0_pipeline(inputs(set), {}, dev);
      CHECK(r.g0 / set.truth.g0 == Approx(1.0).epsilon(5e-3));
      CHECK(r.kappa == Approx(set.truth.kappa).epsilon(1e-3));
      CHECK(r.n_c == Approx(set.truth.n_c).epsilon(5e-3));
    }
  }

  TEST_CASE("uncertainty carries the systematic floor") {
    const auto dev = paper_device();
    const auto set = synthesize_omit_set(scenario_at(dev, 60.0), dev, BackgroundCoeffs{}, {3, 0.01}, wide_grid());
    const auto r = run_g0_pipeline(inputs(set), {}, dev);
    CHECK(r.sigma_g0 >= 0.1 * r.g0);
    CHECK(r.sigma_g0 >= r.sigma_g0_stat);
    CHECK(r.sigma_g0 == Approx(std::hypot(0.1 * r.g0, r.sigma_g0_stat)).epsilon(1e-12));
  }

  TEST_CASE("missing drive metadata names the stage") {
    const auto dev = paper_device();
    auto set = synthesize_omit_set(scenario_at(dev, 60.0), dev, BackgroundCoeffs{}, {}, wide_grid());
    set.omit.meta().erase("drive_hz");
    set.cavity.meta().erase("drive_hz");
    try {
      (void)run_g0_pipeline(inputs(set), {}, dev);
      FAIL("expected a stage-tagged error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::missing_metadata);
      CHECK(e.stage() == "drive_metadata");
    }
  }

  TEST_CASE("missing drive power falls back to the calibration") {
    const auto dev = paper_device();
    auto set = synthesize_omit_set(scenario_at(dev, 60.0), dev, BackgroundCoeffs{}, {}, wide_grid());
    set.omit.meta().erase("p_source_dbm");
    set.cavity.meta().erase("p_source_dbm");
    CHECK_THROWS_AS(run_g0_pipeline(inputs(set), {}, dev), Error);
    const auto r = run_g0_pipeline(inputs(set), {-33.0, -67.0}, dev);
    CHECK(r.g0 / set.truth.g0 == Approx(1.0).epsilon(5e-3));
  }

  TEST_CASE("a failing fit is tagged with its stage") {
    const auto dev = paper_device();
    auto set = synthesize_omit_set(scenario_at(dev, 60.0), dev, BackgroundCoeffs{}, {}, wide_grid());
    const auto& f = set.cavity.frequency();
    set.cavity = ComplexTrace(std::vector<double>(f.begin(), f.end()), std::vector<cplx>(f.size(), cplx(1.0)),
                              set.cavity.meta());
    try {
      (void)run_g0_pipeline(inputs(set), {}, dev);
      FAIL("expected a stage-tagged error");
    } catch (const Error& e) {
      CHECK(e.stage() == "fit_cavity");
    }
  }

  TEST_CASE("results do not depend on the background") {
    const auto dev = paper_device();
    const auto o = scenario_at(dev, 60.0);
    const auto flat = run_g0_pipeline(inputs(synthesize_omit_set(o, dev, BackgroundCoeffs{}, {}, wide_grid())), {}, dev);
    for (double db : {1.0, 2.4}) {
      auto b = ripple_background(5.10e9, 5.28e9, db, 45e6, 3e-9, 0.8);
      const auto r = run_g0_pipeline(inputs(synthesize_omit_set(o, dev, b, {}, wide_grid())), {}, dev);
      CHECK(r.kappa == Approx(flat.kappa).epsilon(1e-4));
      CHECK(r.Gamma_eff == Approx(flat.Gamma_eff).epsilon(1e-4));
      CHECK(r.d_m / r.d_c == Approx(flat.d_m / flat.d_c).epsilon(1e-4));
      CHECK(r.g0 == Approx(flat.g0).epsilon(1e-4));
    }
  }

  TEST_CASE("flux sweep refit recovers the responsivity") {
    const auto dev = paper_device();
    const auto o = scenario_at(dev, 60.0);
    const auto b = ripple_background(5.10e9, 5.28e9, 2.4, 60e6);
    const auto set = synthesize_omit_set(o, dev, b, {}, wide_grid());
    Scenario s;
    s.kind = ScenarioKind::flux_sweep;
    s.flux_sweep.bias_currents_A = linear_grid(0.0, 400e-6, 401);
    auto in = inputs(set);
    in.flux_sweep = synthesize(s, dev, b, {}, wide_grid());
    const auto r = run_g0_pipeline(in, {}, dev);
    REQUIRE(r.refit_responsivity.has_value());
    // jumps are located to half a current step, which offsets the flux axis
    const double half_step = 0.5e-6 * s.flux_sweep.calibration.current_to_flux;
    const auto squid = dev.squid_at_field();
    const double op = o.flux_phi0 * kPhi0;
    const double tol = std::max(std::abs(flux_responsivity(op + half_step, squid) / set.truth.responsivity - 1.0),
                                std::abs(flux_responsivity(op - half_step, squid) / set.truth.responsivity - 1.0));
    MESSAGE("half-step tolerance " << tol);
    CHECK(std::abs(*r.refit_responsivity / set.truth.responsivity - 1.0) <= tol);
  }

  TEST_CASE("report JSON is in cyclic units") {
    const auto dev = paper_device();
    const auto set = synthesize_omit_set(scenario_at(dev, 60.0), dev, BackgroundCoeffs{}, {}, wide_grid());
    const auto r = run_g0_pipeline(inputs(set), {}, dev);
    const auto j = nlohmann::json::parse(report_to_json(r));
    CHECK(j.at("kappa_hz").get<double>() == Approx(9e6).epsilon(1e-3));
    CHECK(j.at("g0_hz").get<double>() == Approx(angular_to_hz(set.truth.g0)).epsilon(5e-3));
    CHECK(j.at("Gamma_eff_hz").get<double>() == Approx(angular_to_hz(r.Gamma_eff)).epsilon(1e-15));
    CHECK(j.at("meta").at("g_chain_db").get<std::string>() == "-67");
    CHECK(j.contains("fits"));
    CHECK_FALSE(nlohmann::json::parse(report_to_json(r, false)).contains("fits"));
    CHECK(report_to_json(r) == report_to_json(run_g0_pipeline(inputs(set), {}, dev)));
  }
}
