#include <cmath>
#include <random>

#include "doctest.h"
#include "fluxom/circuit.hpp"
#include "fluxom/error.hpp"
#include "fluxom/squid.hpp"

using namespace fluxom;
using doctest::Approx;

namespace {

constexpr double kE = 1.602176634e-19;
constexpr double kKB = 1.380649e-23;
constexpr double kH = 6.62607015e-34;

}  // namespace

TEST_SUITE("circuit") {
  TEST_CASE("delta-Y bridge values") {
    CircuitParams p;
    const auto d = delta_y_reduce(p, 13e-12);
    CHECK(d.L_b == Approx(1e-9 * 60e-12 / (2e-9 + 60e-12)).epsilon(1e-12));
    CHECK(d.L_b == Approx(29.13e-12).epsilon(1e-3));
    CHECK(d.L2 == Approx(1e-18 / (2e-9 + 60e-12)).epsilon(1e-12));
    CHECK(d.L2 == Approx(485.4e-12).epsilon(1e-3));
    CHECK(d.L3 == Approx(p.L1 + d.L2));
    CHECK(d.L_A == Approx(p.La + d.L_b));
    CHECK(d.L == Approx(d.L_A + 2.0 * d.L3));
  }

  TEST_CASE("reference device totals") {
    const auto d = delta_y_reduce(CircuitParams{}, 13e-12);
    CHECK(d.L == Approx(1325e-12).epsilon(1e-3));
    CHECK(d.L_tot == Approx(0.5 * (d.L + 13e-12)));
    CHECK(d.L_tot == Approx(666e-12).epsilon(0.01));
    CHECK(d.C_tot == Approx(2.0 * 680e-15 + 34e-15));
    CHECK(d.Lambda == Approx(d.L / (d.L + 13e-12)));
  }

  TEST_CASE("Lambda uses the zero-flux inductance when given") {
    const auto d = delta_y_reduce(CircuitParams{}, 20e-12, 13e-12);
    CHECK(d.L_tot == Approx(0.5 * (d.L + 20e-12)));
    CHECK(d.Lambda == Approx(d.L / (d.L + 13e-12)));
  }

  TEST_CASE("bridge degenerates without the mutual branch") {
    CircuitParams p;
    p.Lm = 0.0;
    const auto d = delta_y_reduce(p, 13e-12);
    CHECK(d.L_b == 0.0);
    CHECK(d.L2 == Approx(p.L0 / 2.0));
    CHECK(d.L == Approx(p.La + 2.0 * p.L1 + p.L0));
  }

  TEST_CASE("non-positive inductance is rejected") {
    CircuitParams p;
    p.L0 = -1e-9;
    CHECK_THROWS_AS(delta_y_reduce(p, 13e-12), Error);
    CHECK_THROWS_AS(delta_y_reduce(CircuitParams{}, 0.0), Error);
  }

  // L does not depend on Lm at all (the two Lm terms cancel), hence the rounding allowance.
  TEST_CASE("reduction is monotone in every inductance") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1e-12, 2e-9), f(1.01, 2.0);
    for (int k = 0; k < 200; ++k) {
      CircuitParams p;
      p.L0 = u(rng);
      p.Lm = u(rng);
      p.La = u(rng);
      p.L1 = u(rng);
      const double LJ = u(rng);
      const double base = delta_y_reduce(p, LJ).L;
      for (double CircuitParams::*m : {&CircuitParams::L0, &CircuitParams::Lm, &CircuitParams::La, &CircuitParams::L1}) {
        CircuitParams q = p;
        q.*m *= f(rng);
        CHECK(delta_y_reduce(q, LJ).L >= base * (1.0 - 1e-14));
      }
    }
  }

  TEST_CASE("lumped resonance and external linewidth") {
    CircuitDerived d;
    d.L_tot = 666e-12;
    d.C_tot = 1394e-15;
    CircuitParams p;
    const auto f = lumped_frequencies(d, p);
    const double w0 = 1.0 / std::sqrt(666e-12 * 1394e-15);
    CHECK(f.omega0 == Approx(w0).epsilon(1e-12));
    CHECK(f.omega0 / (2 * M_PI) == Approx(5.221e9).epsilon(5e-3));
    CHECK(f.kappa_e == Approx(w0 * w0 * 34e-15 * 34e-15 * 50.0 / (2.0 * 1394e-15)).epsilon(1e-12));
    CHECK(f.kappa_e / (2 * M_PI) == Approx(3.5e6).epsilon(0.03));
    CHECK(f.kappa_i == 0.0);
  }

  TEST_CASE("internal loss") {
    CircuitDerived d;
    d.L_tot = 666e-12;
    d.C_tot = 1394e-15;
    CircuitParams p;
    p.R_loss = 1e5;
    CHECK(lumped_frequencies(d, p).kappa_i == Approx(1.0 / (1e5 * 1394e-15)));
  }

  TEST_CASE("resonance scales as inverse square root of inductance") {
    CircuitDerived d;
    d.L_tot = 666e-12;
    d.C_tot = 1394e-15;
    const double w1 = lumped_frequencies(d, CircuitParams{}).omega0;
    d.L_tot *= 2.0;
    const double w2 = lumped_frequencies(d, CircuitParams{}).omega0;
    CHECK(std::abs(w1 / w2 - std::sqrt(2.0)) < 1e-12 * std::sqrt(2.0));
  }

  TEST_CASE("Kerr shift") {
    const double hbar = kH / (2.0 * M_PI);
    const double chi = kerr_anharmonicity(1394e-15, 0.99);
    CHECK(chi < 0.0);
    CHECK(chi == Approx(-kE * kE / (2.0 * hbar * 1394e-15) * 1e-6).epsilon(1e-9));
    CHECK(-chi / (2 * M_PI) == Approx(14.0).epsilon(0.05));
    CHECK(std::abs(kerr_anharmonicity(1394e-15, 1.0 - 1e-9)) < 1e-15);

    const double L = delta_y_reduce(CircuitParams{}, 13e-12).L;
    const double Lambda = L / (L + 27.8e-12);
    CHECK(1.0 - Lambda == Approx(0.0205).epsilon(0.01));
    CHECK(-kerr_anharmonicity(1394e-15, Lambda) / (2 * M_PI) == Approx(120.0).epsilon(0.02));
  }

  TEST_CASE("Kerr shift magnitude falls as Lambda rises") {
    double prev = -INFINITY;
    for (double L = 0.01; L < 1.0; L += 0.01) {
      const double chi = kerr_anharmonicity(1394e-15, L);
      CHECK(chi > prev);
      prev = chi;
    }
  }

  TEST_CASE("intracavity photons") {
    const double hbar = kH / (2.0 * M_PI);
    const double wd = 2 * M_PI * 5.221e9, k = 2 * M_PI * 9e6;
    CHECK(intracavity_photons(1e-16, wd, 0.0, k, k) == Approx(2e-16 / (hbar * wd * k)).epsilon(1e-12));
    CHECK(intracavity_photons(1e-16, wd, 0.0, k, k) == Approx(1.02).epsilon(0.01));
    const double D = -2 * M_PI * 7.129e6;
    CHECK(intracavity_photons(1e-16, wd, D, k, k) == Approx(2e-16 / (hbar * wd) * k / (k * k + 4 * D * D)).epsilon(1e-12));
    CHECK(intracavity_photons(1e-16, wd, D, k, k) == Approx(0.291).epsilon(0.01));
    CHECK(intracavity_photons(0.0, wd, D, k, k) == 0.0);
    CHECK(intracavity_photons(1e-16, wd, D, k, 0.5 * k) < intracavity_photons(1e-16, wd, D, k, k));
  }

  TEST_CASE("HEMT reference power") {
    CHECK(hemt_reference_power(2.0, 1e3) == Approx(-165.6).epsilon(0.1 / 165.6));
    CHECK(hemt_reference_power(1.0, 1.0) == Approx(10.0 * std::log10(kKB / 1e-3)).epsilon(1e-12));
    CHECK(hemt_reference_power(1.0, 1.0) == Approx(-198.6).epsilon(1e-3));
    CHECK(hemt_reference_power(2.0, 1e4) - hemt_reference_power(2.0, 1e3) == Approx(10.0).epsilon(1e-12));
  }

  TEST_CASE("chain input power") {
    CHECK(chain_input_power(-20.0, -110.0) == Approx(1e-16).epsilon(1e-12));
    CHECK(chain_input_power(0.0, 0.0) == Approx(1e-3).epsilon(1e-15));
    CHECK(chain_input_power(-20.0, -67.0) == Approx(std::pow(10.0, -8.7) * 1e-3).epsilon(1e-12));
    CHECK(chain_input_power(-20.0, -67.0) == Approx(2.0e-12).epsilon(0.01));
  }

  TEST_CASE("parameter validation") {
    CircuitParams p;
    CHECK_NOTHROW(p.validate());
    p.C = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = CircuitParams{};
    p.R_loss = -5.0;
    CHECK_THROWS_AS(p.validate(), Error);
  }
}
