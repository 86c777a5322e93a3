#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "anisolab/lower_order.hpp"

using namespace anisolab;

namespace {

const std::vector<double> kX{0.5, 0.5};

double phi(const LowerOrderSpec& s, double t, std::vector<double> xi) { return phi_eval(s, kX, t, xi); }

}  // namespace

TEST_CASE("model term values") {
  const LowerOrderSpec s = make_model_phi({{2.0, 2.0}}, 3.0);
  CHECK(phi(s, 2.0, {1.0, 1.0}) == doctest::Approx(12.0));
  CHECK(phi(s, 0.0, {5.0, -3.0}) == 0.0);
  CHECK(phi(s, -1.0, {0.0, 0.0}) == doctest::Approx(-1.0));
  CHECK(phi(make_zero_phi({{1.5, 1.8}}), 3.0, {1.0, 2.0}) == 0.0);
}

TEST_CASE("regularization values and saturation") {
  CHECK(regularize(12.0, 0.25) == doctest::Approx(3.0));
  CHECK(regularize(0.0, 0.25) == 0.0);
  CHECK(regularize(-1e6, 0.1) == doctest::Approx(-10.0).epsilon(1e-4));
  CHECK(regularize(-1e6, 0.1) > -10.0);

  const RegularizedLowerOrder reg{make_model_phi({{2.0, 2.0}}, 3.0), 0.0};
  const std::vector<double> xi{1.0, 1.0};
  for (double eps = 1.0; eps > 1e-9; eps *= 0.5) {
    const double v = phi_reg({reg.base, eps}, kX, 2.0, xi);
    CHECK(eps * std::abs(v) < 1.0);
  }
}

TEST_CASE("model constants") {
  ModelConstants c = model_constants(3.0, 1.0);
  CHECK(c.zeta(0.5) == 1.0);
  CHECK(c.zeta(3.0) == doctest::Approx(9.0));
  CHECK(c.c == 1.0);
  CHECK(c.gamma == 1.0);
  c = model_constants(2.0, 0.5);
  CHECK(c.gamma == doctest::Approx(0.5));
  CHECK_THROWS_AS(model_constants(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(model_constants(2.0, 0.0), std::invalid_argument);

  const CheckResult r = check_zeta_monotone(make_model_phi({{1.5, 1.8}}, 3.0));
  CHECK(r.passed);
}

TEST_CASE("regularized term stays below min(|Phi|, 1/eps), keeps its sign and grows as eps decreases") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const LowerOrderSpec s = make_model_phi({{1.5, 1.8}}, 2.5);
  for (int k = 0; k < 2000; ++k) {
    const double t = u(rng);
    const std::vector<double> xi{u(rng), u(rng)};
    const double full = phi(s, t, xi);
    double prev = 0.0;
    for (double eps = 1.0; eps >= 1e-8; eps *= 0.1) {
      const double v = phi_reg({s, eps}, kX, t, xi);
      CHECK(std::abs(v) <= std::min(std::abs(full), 1.0 / eps));
      CHECK(v * t >= 0.0);
      CHECK(std::abs(v) >= prev);
      prev = std::abs(v);
    }
    CHECK(prev == doctest::Approx(std::abs(full)).epsilon(1e-5));
  }
}

TEST_CASE("structural checks pass for the model term") {
  Rng rng(9);
  for (double m : {1.1, 2.0, 3.0}) {
    const LowerOrderSpec s = make_model_phi({{1.5, 1.8}}, m);
    CHECK(check_sign(s, 100000, rng).passed);
    CHECK(check_growth_phi(s, 100000, rng).passed);
    CHECK(check_lower_bound(s, 100000, rng).passed);
    CHECK(admissible_for_solver(s, rng));
  }
}

TEST_CASE("a sign-violating custom term fails with a witness and is not admissible") {
  Rng rng(10);
  LowerOrderSpec s;
  s.exponents = {{1.5, 1.8}};
  s.kind = PhiKind::custom;
  s.custom = [](std::span<const double>, double t, std::span<const double>) { return -t; };
  s.zeta = [](double v) { return std::max(1.0, v); };
  const CheckResult r = check_sign(s, 1000, rng);
  CHECK_FALSE(r.passed);
  CHECK_FALSE(r.witness.empty());
  CHECK_FALSE(admissible_for_solver(s, rng));
}

TEST_CASE("a table term reproduces the model for m = 2 and passes its checks") {
  Rng rng(11);
  LowerOrderSpec s = make_table_phi({{1.5, 1.8}}, PiecewiseLinear{{{-1.0, -1.0}, {1.0, 1.0}}});
  s.zeta = [](double v) { return v; };
  s.gamma = 1.0;
  s.tau = 1.0;
  const LowerOrderSpec model = make_model_phi({{1.5, 1.8}}, 2.0);
  for (double t : {-3.0, -0.2, 0.0, 0.7, 5.0}) CHECK(phi(s, t, {0.3, -2.0}) == doctest::Approx(phi(model, t, {0.3, -2.0})));
  CHECK(check_sign(s, 10000, rng).passed);
  CHECK(check_growth_phi(s, 10000, rng).passed);
  CHECK(check_lower_bound(s, 10000, rng).passed);
  CHECK(check_zeta_monotone(s).passed);
}

TEST_CASE("piecewise-linear interpolation extrapolates linearly") {
  const PiecewiseLinear g{{{0.0, 0.0}, {1.0, 2.0}, {3.0, 2.0}}};
  CHECK(g(0.5) == doctest::Approx(1.0));
  CHECK(g(2.0) == doctest::Approx(2.0));
  CHECK(g(-1.0) == doctest::Approx(-2.0));
  CHECK(g(5.0) == doctest::Approx(2.0));
}

TEST_CASE("partials agree with central differences") {
  const std::vector<double> xi{0.4, -1.3};
  for (double m : {1.5, 3.0}) {
    const LowerOrderSpec s = make_model_phi({{1.5, 1.8}}, m);
    for (double eps : {0.0, 0.3}) {
      for (double t : {-1.7, 0.6}) {
        const PhiPartials pp = phi_partials(s, kX, t, xi, eps, 1e-8);
        auto f = [&](double tt, std::vector<double> x) {
          const double v = phi_eval(s, kX, tt, x);
          return eps > 0.0 ? regularize(v, eps) : v;
        };
        const double h = 1e-6;
        CHECK(pp.value == doctest::Approx(f(t, xi)));
        CHECK(pp.d_t == doctest::Approx((f(t + h, xi) - f(t - h, xi)) / (2 * h)).epsilon(1e-6));
        for (int j = 0; j < 2; ++j) {
          std::vector<double> hi = xi, lo = xi;
          hi[j] += h;
          lo[j] -= h;
          CHECK(pp.d_xi[j] == doctest::Approx((f(t, hi) - f(t, lo)) / (2 * h)).epsilon(1e-6));
        }
      }
    }
  }
}
