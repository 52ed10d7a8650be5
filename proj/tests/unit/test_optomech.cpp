#include <cmath>
#include <random>

#include "doctest.h"
#include "fluxom/error.hpp"
#include "fluxom/mechanics.hpp"
#include "fluxom/optomech.hpp"

using namespace fluxom;
using doctest::Approx;

namespace {

constexpr double k2pi = 2.0 * M_PI;
const double kKappa = k2pi * 9e6;
const double kOmegaM = k2pi * 7.129e6;
const double kG = k2pi * 3e3;

OmitModel red_sideband(double g, double delta_m = 0.0) {
  OmitModel m;
  m.kappa = kKappa;
  m.K = kKappa;
  m.theta = 0.0;
  m.omega0 = k2pi * 5.2e9;
  m.Omega_m = kOmegaM;
  m.omega_d = m.omega0 - m.Omega_m - delta_m;
  m.g = g;
  return m;
}

}  // namespace

TEST_SUITE("optomech") {
  TEST_CASE("single-photon coupling") {
    DeviceParams dev;
    dev.b_parallel = 0.01;
    const double R = k2pi * 60e6 / kPhi0;
    const double g0 = single_photon_coupling(R, dev, 34.3e-15);
    CHECK(g0 == Approx(R * 0.86 * 0.01 * 20e-6 * 34.3e-15).epsilon(1e-12));
    CHECK(g0 / k2pi == Approx(171.0).epsilon(0.01));
    dev.b_parallel = 0.0;
    CHECK(single_photon_coupling(R, dev, 34.3e-15) == 0.0);
  }

  TEST_CASE("coupling is exactly linear in field and responsivity") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    DeviceParams a, b;
    for (int i = 0; i < 100; ++i) {
      const double B = 1e-3 * u(rng), s = u(rng), R = k2pi * 1e7 * u(rng) / kPhi0;
      a.b_parallel = B;
      b.b_parallel = s * B;
      CHECK(single_photon_coupling(R, b, 3e-14) == Approx(s * single_photon_coupling(R, a, 3e-14)).epsilon(1e-14));
      CHECK(single_photon_coupling(s * R, a, 3e-14) == Approx(s * single_photon_coupling(R, a, 3e-14)).epsilon(1e-14));
    }
    a.b_parallel = 0.01;
    CHECK(single_photon_coupling(1.0, a, 1.0) * 2.0 == single_photon_coupling(1.0, [&] {
            DeviceParams d = a;
            d.b_parallel = 0.02;
            return d;
          }(), 1.0));
  }

  TEST_CASE("coupling point") {
    DeviceParams dev;
    dev.b_parallel = 0.01;
    const auto c = coupling_point(k2pi * 60e6 / kPhi0, dev, 34e-15, 1e4);
    CHECK(c.g == Approx(100.0 * c.g0));
    CHECK(c.G_pull * 34e-15 == Approx(c.g0));
  }

  TEST_CASE("steady-state field gives the photon number") {
    const double P = 1e-16, wd = k2pi * 5.2e9, D = -kOmegaM;
    const auto f = steady_state_field(P, wd, D, kKappa, 0.5 * kKappa);
    const double hbar = 6.62607015e-34 / k2pi;
    const double nc = 2.0 * P / (hbar * wd) * 0.5 * kKappa / (kKappa * kKappa + 4 * D * D);
    CHECK(std::norm(f.alpha_bar) == Approx(nc).epsilon(1e-12));
    CHECK_THROWS_AS(steady_state_field(P, wd, D, kKappa, 2.0 * kKappa), Error);
  }

  TEST_CASE("without coupling the self-energy vanishes") {
    MechParams p;
    const auto s = susceptibilities(kOmegaM + 3.0, -kOmegaM, kKappa, 0.0, p, kOmegaM);
    CHECK(s.Sigma == cplx(0.0, 0.0));
    const cplx bare = 1.0 / (2.0 * p.mass * kOmegaM) / cplx(-3.0, -0.5 * p.Gamma_m);
    CHECK(std::abs(s.chi_m_eff - bare) < 1e-14 * std::abs(bare));
    CHECK(std::abs(s.chi_c - 1.0 / cplx(0.5 * kKappa, -3.0)) < 1e-20);
  }

  TEST_CASE("spring and damping at the red sideband") {
    const auto r = spring_and_damping(-kOmegaM, kOmegaM, kKappa, kG);
    const double q = 0.25 * kKappa * kKappa;
    const double dn = -2.0 * kOmegaM;
    CHECK(r.Gamma_o == Approx(kG * kG * kKappa * (1.0 / q - 1.0 / (q + dn * dn))).epsilon(1e-12));
    CHECK(r.Gamma_o / k2pi == Approx(3.6).epsilon(0.02));
    CHECK(r.dOmega_m / k2pi == Approx(-0.57).epsilon(0.02));
    MechParams p;
    const auto s = susceptibilities(kOmegaM, -kOmegaM, kKappa, kG, p, kOmegaM);
    CHECK(s.Sigma.real() == Approx(r.dOmega_m).epsilon(1e-12));
    CHECK(-2.0 * s.Sigma.imag() == Approx(r.Gamma_o).epsilon(1e-12));
  }

  TEST_CASE("zero detuning has neither spring nor damping") {
    const auto r = spring_and_damping(0.0, kOmegaM, kKappa, kG);
    CHECK(r.dOmega_m == 0.0);
    CHECK(r.Gamma_o == 0.0);
    MechParams p;
    CHECK(susceptibilities(kOmegaM, 0.0, kKappa, kG, p, kOmegaM).Sigma.imag() == Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("closed forms agree with the self-energy for random draws") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-3.0, 3.0), pos(0.1, 3.0);
    MechParams p;
    for (int i = 0; i < 500; ++i) {
      const double Wm = kOmegaM * pos(rng), k = kKappa * pos(rng), g = kG * pos(rng), D = kOmegaM * u(rng);
      const auto r = spring_and_damping(D, Wm, k, g);
      const auto s = susceptibilities(Wm, D, k, g, p, Wm);
      CHECK(s.Sigma.real() == Approx(r.dOmega_m).epsilon(1e-12));
      CHECK(-2.0 * s.Sigma.imag() == Approx(r.Gamma_o).epsilon(1e-12));
      CHECK(spring_and_damping(-D, Wm, k, g).Gamma_o == Approx(-r.Gamma_o).epsilon(1e-12));
    }
  }

  TEST_CASE("damping sign convention") {
    CHECK(spring_and_damping(-kOmegaM, kOmegaM, kKappa, kG).Gamma_o > 0.0);
    CHECK(spring_and_damping(kOmegaM, kOmegaM, kKappa, kG).Gamma_o < 0.0);
  }

  TEST_CASE("optical spring is below 1 Hz on the operating set") {
    for (double g = 0.0; g <= kG; g += kG / 30.0)
      for (double D = -kOmegaM - k2pi * 50e3; D <= -kOmegaM + k2pi * 50e3; D += k2pi * 5e3)
        CHECK(std::abs(spring_and_damping(D, kOmegaM, kKappa, g).dOmega_m) / k2pi < 1.0);
  }

  TEST_CASE("OMIT response without coupling is the bare cavity") {
    const auto m = red_sideband(0.0);
    for (double df = -20e6; df <= 20e6; df += 1e6) {
      const double w = m.omega0 + k2pi * df;
      CHECK(std::abs(omit_response(w, m) - bare_cavity_response(w, m.omega0, m.kappa, m.K, m.theta)) == 0.0);
    }
  }

  TEST_CASE("OMIT response away from the window falls back to the bare cavity") {
    // the mechanical term is a Lorentzian of width Gamma_eff, so its tail decays as 1/offset
    const auto m = red_sideband(kG);
    const double Geff = effective_linewidth(m);
    const double Ceff = 4.0 * kG * kG / (kKappa * Geff);
    for (double df : {-20e6, -5e6, -1e5, -1e3, 1e3, 1e5, 3e6, 20e6}) {
      const double w = m.omega_d + m.Omega_m + k2pi * df;
      const double dev = std::abs(omit_response(w, m) - bare_cavity_response(w, m.omega0, m.kappa, m.K, m.theta));
      CHECK(dev * std::abs(k2pi * df) <= 1.01 * Ceff * 0.5 * Geff);
    }
  }

  TEST_CASE("window height over dip depth") {
    const auto m = red_sideband(kG);
    const double Geff = effective_linewidth(m);
    CHECK(Geff / k2pi == Approx(11.6).epsilon(0.01));
    const double ratio = 4.0 * kG * kG / (kKappa * Geff);
    CHECK(ratio == Approx(0.344).epsilon(2e-3));
    const double dOm = spring_and_damping(m.omega_d - m.omega0, m.Omega_m, m.kappa, m.g).dOmega_m;
    const double w = m.omega_d + m.Omega_m + dOm;
    const cplx bare = bare_cavity_response(w, m.omega0, m.kappa, m.K, m.theta);
    const double dip = std::abs(1.0 - bare_cavity_response(m.omega0, m.omega0, m.kappa, m.K, m.theta));
    CHECK(std::abs(omit_response(w, m) - bare) / dip == Approx(ratio).epsilon(1e-5));
  }

  TEST_CASE("trace builder warns for strong coupling") {
    int warnings = 0;
    auto old = set_warning_handler([&](std::string_view) { ++warnings; });
    std::vector<double> grid{5.0e9, 5.1e9, 5.2e9};
    (void)omit_response_trace(grid, red_sideband(kG));
    CHECK(warnings == 0);
    (void)omit_response_trace(grid, red_sideband(0.2 * kKappa));
    CHECK(warnings == 1);
    set_warning_handler(old);
  }

  TEST_CASE("circle diameters") {
    const double Geff = k2pi * 11.6;
    const auto d0 = circle_diameters(kKappa, kKappa, kG, Geff, 0.0);
    const auto c = cooperativities(kG, kKappa, k2pi * 8.0, Geff);
    CHECK(d0.d_c == 1.0);
    CHECK(d0.d_m / d0.d_c == Approx(c.C_eff).epsilon(1e-14));
    const auto none = circle_diameters(kKappa, kKappa, 0.0, Geff, 0.0);
    CHECK(none.d_c == 1.0);
    CHECK(none.d_m == 0.0);
    const auto half = circle_diameters(kKappa, kKappa, kG, Geff, 0.5 * kKappa);
    CHECK(half.d_m == Approx(0.5 * d0.d_m).epsilon(1e-14));
    const double dm = k2pi * 20e3;
    const auto off = circle_diameters(0.7 * kKappa, kKappa, kG, Geff, dm);
    CHECK(off.d_m / off.d_c == Approx(c.C_eff * kKappa * kKappa / (kKappa * kKappa + 4 * dm * dm)).epsilon(1e-13));
  }

  TEST_CASE("cooperativities") {
    const auto c = cooperativities(kG, kKappa, k2pi * 8.0, k2pi * 11.6);
    CHECK(c.C == Approx(0.5).epsilon(0.03));
    CHECK(c.C >= c.C_eff);
    const auto z = cooperativities(0.0, kKappa, k2pi * 8.0, k2pi * 8.0);
    CHECK(z.C == 0.0);
    CHECK(z.C_eff == 0.0);
    CHECK(cooperativities(k2pi * 70e3, kKappa, k2pi * 8.0, k2pi * 8.0).C == Approx(300.0).epsilon(0.15));
  }

  TEST_CASE("coupling from circles") {
    const double Geff = k2pi * 11.6;
    const auto d = circle_diameters(kKappa, kKappa, kG, Geff, 0.0);
    const auto e = coupling_from_circles(d.d_m, d.d_c, kKappa, 0.0, Geff, 1e4);
    CHECK(e.g == Approx(kG).epsilon(1e-9));
    CHECK(e.g0 == Approx(kG / 100.0).epsilon(1e-9));
    const auto z = coupling_from_circles(0.0, 1.0, kKappa, 0.0, Geff, 1e4);
    CHECK(z.g == 0.0);
    CHECK(z.g0 == 0.0);
    const auto peak = coupling_from_circles(
        circle_diameters(kKappa, kKappa, k2pi * 70e3, Geff, 0.0).d_m, 1.0, kKappa, 0.0, Geff, 1e5);
    CHECK(peak.g0 / k2pi == Approx(230.0).epsilon(0.1));
    CHECK_THROWS_AS(coupling_from_circles(0.1, 1.0, kKappa, 0.0, Geff, 0.0), Error);
    CHECK_THROWS_AS(coupling_from_circles(-0.1, 1.0, kKappa, 0.0, Geff, 1.0), Error);
  }

  TEST_CASE("circle inversion is the identity on g") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pos(0.05, 20.0), sgn(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const double k = kKappa * pos(rng), K = k * pos(rng) / 20.0, g = kG * pos(rng), Ge = k2pi * 8.0 * pos(rng);
      const double dm = k * sgn(rng);
      const auto d = circle_diameters(K, k, g, Ge, dm);
      const auto e = coupling_from_circles(d.d_m, d.d_c, k, dm, Ge, 1.0);
      CHECK(e.g == Approx(g).epsilon(1e-9));
    }
  }
}
