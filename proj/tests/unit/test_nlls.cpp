#include <Eigen/Dense>
#include <cmath>
#include <json.hpp>
#include <random>

#include "doctest.h"
#include "fluxom/error.hpp"
#include "fluxom/fit/nlls.hpp"

using namespace fluxom;
using doctest::Approx;

namespace {

struct Line {
  std::vector<double> x, y;
};

Line noisy_line(std::uint64_t seed, double a, double b, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> e(0.0, 0.1);
  Line l;
  for (std::size_t i = 0; i < n; ++i) {
    l.x.push_back(static_cast<double>(i) / static_cast<double>(n - 1) * 4.0 - 1.0);
    l.y.push_back(a * l.x.back() + b + e(rng));
  }
  return l;
}

double lorentz(double x, double x0, double w, double A, double c) { return c + A * w * w / ((x - x0) * (x - x0) + w * w); }

}  // namespace

TEST_SUITE("nlls") {
  TEST_CASE("affine fit matches linear least squares") {
    const auto l = noisy_line(1, 2.5, -0.7, 50);
    ResidualFn f = [&](std::span<const double> p, std::span<double> r) {
      for (std::size_t i = 0; i < l.x.size(); ++i) r[i] = p[0] * l.x[i] + p[1] - l.y[i];
    };
    const auto res = nlls_minimize(f, l.x.size(), {{"a", 0.0}, {"b", 0.0}});
    CHECK(res.converged);
    CHECK(res.n_iterations <= 2);

    Eigen::MatrixXd A(l.x.size(), 2);
    Eigen::VectorXd y(l.x.size());
    for (std::size_t i = 0; i < l.x.size(); ++i) {
      A(static_cast<Eigen::Index>(i), 0) = l.x[i];
      A(static_cast<Eigen::Index>(i), 1) = 1.0;
      y(static_cast<Eigen::Index>(i)) = l.y[i];
    }
    const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(y);
    CHECK(res.value("a") == Approx(sol(0)).epsilon(1e-9));
    CHECK(res.value("b") == Approx(sol(1)).epsilon(1e-9));

    const double s2 = (A * sol - y).squaredNorm() / static_cast<double>(l.x.size() - 2);
    const Eigen::MatrixXd cov = s2 * (A.transpose() * A).inverse();
    CHECK(res.reduced_chi2() == Approx(s2).epsilon(1e-8));
    CHECK(res.cov("a", "a") == Approx(cov(0, 0)).epsilon(1e-5));
    CHECK(res.cov("a", "b") == Approx(cov(0, 1)).epsilon(1e-5).scale(cov(0, 0)));
    CHECK(res.sigma("b") == Approx(std::sqrt(cov(1, 1))).epsilon(1e-5));
  }

  TEST_CASE("Lorentzian recovered from a perturbed start") {
    const double t[] = {0.3, 0.05, 2.0, 0.4};
    std::vector<double> x;
    for (int i = 0; i <= 400; ++i) x.push_back(-1.0 + 2.0 * i / 400.0);
    ResidualFn f = [&](std::span<const double> p, std::span<double> r) {
      for (std::size_t i = 0; i < x.size(); ++i) r[i] = lorentz(x[i], p[0], p[1], p[2], p[3]) - lorentz(x[i], t[0], t[1], t[2], t[3]);
    };
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<ParamSpec> init = {{"x0", t[0] + 0.2 * t[1] * u(rng) * 5.0, -1.0, 1.0, 0.01},
                                     {"w", t[1] * (1.0 + u(rng)), 0.0, INFINITY, 0.01},
                                     {"A", t[2] * (1.0 + u(rng)), -INFINITY, INFINITY, 0.1},
                                     {"c", t[3] * (1.0 + u(rng)), -INFINITY, INFINITY, 0.1}};
      const auto res = nlls_minimize(f, x.size(), init);
      REQUIRE(res.converged);
      CHECK(res.value("x0") == Approx(t[0]).epsilon(1e-8));
      CHECK(res.value("w") == Approx(t[1]).epsilon(1e-8));
      CHECK(res.value("A") == Approx(t[2]).epsilon(1e-8));
      CHECK(res.value("c") == Approx(t[3]).epsilon(1e-8));
    }
  }

  TEST_CASE("redundant parameters are rank deficient") {
    ResidualFn f = [](std::span<const double> p, std::span<double> r) {
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = (p[0] + p[1]) * static_cast<double>(i) - 3.0;
    };
    try {
      (void)nlls_minimize(f, 10, {{"a", 1.0}, {"b", 1.0}});
      FAIL("expected singular Jacobian");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::singular_jacobian);
    }
  }

  TEST_CASE("bounds hold when the optimum lies outside") {
    // unconstrained optimum at a = 5
    ResidualFn f = [](std::span<const double> p, std::span<double> r) {
      r[0] = p[0] - 5.0;
      r[1] = 0.1 * (p[0] - 5.0);
    };
    for (auto spec : {ParamSpec{"a", 0.5, 0.0, 1.0, 0.1}, ParamSpec{"a", -3.0, -INFINITY, 2.0, 0.1}}) {
      const auto res = nlls_minimize(f, 2, {spec});
      CHECK(res.value("a") <= spec.upper);
      CHECK(res.value("a") >= spec.lower);
      CHECK(res.value("a") == Approx(spec.upper).epsilon(1e-4));
    }
  }

  TEST_CASE("values stay inside bounds on random problems") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 50; ++k) {
      const double target = u(rng), lo = -1.0, hi = 1.0;
      ResidualFn f = [&](std::span<const double> p, std::span<double> r) {
        r[0] = std::sin(p[0]) - std::sin(target);
        r[1] = p[0] - target;
      };
      const auto res = nlls_minimize(f, 2, {{"a", 0.0, lo, hi, 0.1}});
      CHECK(res.value("a") >= lo);
      CHECK(res.value("a") <= hi);
    }
  }

  TEST_CASE("init outside bounds is an input error") {
    ResidualFn f = [](std::span<const double> p, std::span<double> r) { r[0] = p[0]; };
    try {
      (void)nlls_minimize(f, 1, {{"a", 2.0, 0.0, 1.0, 1.0}});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::invalid_argument);
    }
  }

  TEST_CASE("non-finite model at start is an input error") {
    ResidualFn f = [](std::span<const double> p, std::span<double> r) { r[0] = std::log(p[0]); };
    CHECK_THROWS_AS(nlls_minimize(f, 1, {{"a", -1.0}}), Error);
  }

  TEST_CASE("iteration cap returns a partial result") {
    ResidualFn f = [](std::span<const double> p, std::span<double> r) {
      r[0] = 10.0 * (p[1] - p[0] * p[0]);
      r[1] = 1.0 - p[0];
    };
    NllsOptions o;
    o.max_iterations = 2;
    const auto res = nlls_minimize(f, 2, {{"x", -1.2}, {"y", 1.0}}, o);
    CHECK_FALSE(res.converged);
    try {
      (void)require_converged(res, "banana");
      FAIL("expected non-convergence");
    } catch (const Error& e) {
      CHECK(e.is_convergence_failure());
      CHECK(std::string(e.what()).find("banana") != std::string::npos);
    }
    const auto full = nlls_minimize(f, 2, {{"x", -1.2}, {"y", 1.0}});
    CHECK(require_converged(full, "banana").value("x") == Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("complex trace fit with a mask") {
    std::vector<double> f;
    std::vector<cplx> v;
    for (int i = 0; i < 100; ++i) {
      f.push_back(1.0 + i * 0.01);
      const double w = 2 * M_PI * f.back();
      v.push_back(cplx(0.5, -0.25) * std::exp(cplx(0.0, 0.1 * w)));
    }
    v[50] = cplx(100.0, 100.0);
    const ComplexTrace tr(f, v);
    std::vector<char> mask(100, 1);
    mask[50] = 0;
    TraceModel m = [](double w, std::span<const double> p) { return cplx(p[0], p[1]) * std::exp(cplx(0.0, p[2] * w)); };
    const auto res = nlls_minimize(m, tr, {{"re", 0.4, -INFINITY, INFINITY, 0.1}, {"im", 0.0, -INFINITY, INFINITY, 0.1},
                                           {"tau", 0.11, -INFINITY, INFINITY, 0.01}},
                                   mask);
    CHECK(res.n_residuals == 198);
    CHECK(res.value("re") == Approx(0.5).epsilon(1e-9));
    CHECK(res.value("im") == Approx(-0.25).epsilon(1e-9));
    CHECK(res.value("tau") == Approx(0.1).epsilon(1e-9));
  }

  TEST_CASE("result lookup and JSON") {
    ResidualFn f = [](std::span<const double> p, std::span<double> r) {
      r[0] = p[0] - 1.0;
      r[1] = p[0] - 3.0;
    };
    const auto res = nlls_minimize(f, 2, {{"a", 0.0}});
    CHECK(res.has("a"));
    CHECK_FALSE(res.has("b"));
    CHECK_THROWS_AS(res.value("b"), Error);
    const auto j = nlohmann::json::parse(fit_result_to_json(res));
    CHECK(j.at("values").at("a").get<double>() == Approx(2.0));
    CHECK(j.at("converged").get<bool>());
    CHECK(j.at("n_residuals").get<int>() == 2);
    for (const char* k : {"sigmas", "residual_norm", "n_iterations", "message"}) CHECK(j.contains(k));
  }
}
