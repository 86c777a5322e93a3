#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "anisolab/flux.hpp"

using namespace anisolab;

namespace {

const std::vector<double> kOrigin{0.5, 0.5};

std::vector<double> eval(const FluxSpec& s, std::vector<double> xi, double t = 0.0) {
  return flux_eval(s, std::span<const double>(kOrigin.data(), xi.size()), t, xi);
}

std::vector<double> eval_smoothed(const FluxSpec& s, double delta, std::vector<double> xi) {
  return flux_eval_smoothed({s, delta}, std::span<const double>(kOrigin.data(), xi.size()), 0.0, xi);
}

}  // namespace

TEST_CASE("prototype flux values") {
  auto a = eval(make_prototype_flux({{3.0, 2.0}}), {2.0, -1.0});
  CHECK(a[0] == doctest::Approx(4.0));
  CHECK(a[1] == doctest::Approx(-1.0));

  a = eval(make_prototype_flux({{1.5, 1.8}}), {0.0, 0.0});
  CHECK(a[0] == 0.0);
  CHECK(a[1] == 0.0);

  a = eval(make_prototype_flux({{1.5, 1.5}}), {4.0, 0.0});
  CHECK(a[0] == doctest::Approx(2.0));
  CHECK(a[1] == 0.0);
}

TEST_CASE("smoothed flux values") {
  const FluxSpec s = make_prototype_flux({{3.0, 2.0}});
  auto a = eval_smoothed(s, 1e-9, {2.0, -1.0});
  CHECK(a[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(-1.0).epsilon(1e-12));

  const FluxSpec q = make_prototype_flux({{1.5, 1.5}});
  for (double delta : {1e-6, 0.1, 4.0}) CHECK(eval_smoothed(q, delta, {0.0, 1.0})[0] == 0.0);
  CHECK(eval_smoothed(q, 4.0, {3.0, 0.0})[0] == doctest::Approx(3.0 / std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("coupled flux carries the t-dependent factor") {
  const FluxSpec s = make_prototype_flux({{2.0, 2.0, 2.0}}, 1.0, 0.5);
  const FluxComponent c = flux_component(s, 0, 1.0, 3.0);
  CHECK(c.value == doctest::Approx(3.0 * 1.25));
  // d/dt of 1 + 0.5 t^2 / (1 + t^2) at t = 1 is 0.25
  CHECK(c.d_t == doctest::Approx(3.0 * 0.25));
  CHECK(s.nu0 == 1.0);
  CHECK(s.nu == doctest::Approx(1.5));
}

TEST_CASE("flux is odd in xi for prototype and smoothed variants") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const FluxSpec s = make_prototype_flux({{1.2, 1.5, 2.4}}, 1.0, 0.3);
  for (int t = 0; t < 1000; ++t) {
    const std::vector<double> xi{u(rng), u(rng), u(rng)};
    const std::vector<double> mxi{-xi[0], -xi[1], -xi[2]};
    const double tt = u(rng);
    const auto a = eval(s, xi, tt), b = eval(s, mxi, tt);
    for (int j = 0; j < 3; ++j) CHECK(a[j] == -b[j]);
    const auto as = eval_smoothed(s, 0.3, xi), bs = eval_smoothed(s, 0.3, mxi);
    for (int j = 0; j < 3; ++j) CHECK(as[j] == -bs[j]);
  }
}

TEST_CASE("smoothing error shrinks monotonically as delta decreases") {
  const FluxSpec s = make_prototype_flux({{1.3, 2.7}});
  for (double xi : {-3.0, -0.02, 1e-3, 0.5, 7.0}) {
    for (int j = 0; j < 2; ++j) {
      const double exact = flux_component(s, j, 0.0, xi).value;
      double prev = INFINITY;
      for (double delta = 1.0; delta >= 1e-8; delta *= 0.1) {
        const double err = std::abs(flux_component(s, j, 0.0, xi, delta).value - exact);
        CHECK(err <= prev);
        prev = err;
      }
      CHECK(prev < 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("coercivity check on prototype, scaled and smoothed fluxes") {
  Rng rng(1);
  for (const ExponentVector& p : {ExponentVector{{1.5, 1.8}}, ExponentVector{{2.0, 3.0}},
                                  ExponentVector{{1.2, 1.5, 2.0}}}) {
    const CheckResult r = check_coercivity(make_prototype_flux(p), 100000, rng);
    CHECK(r.passed);
    CHECK(r.statistic == doctest::Approx(1.0).epsilon(1e-12));
  }

  const CheckResult half = check_coercivity(make_prototype_flux({{1.5, 1.8}}, 0.5), 10000, rng);
  CHECK(half.passed);
  CHECK(half.statistic == doctest::Approx(0.5).epsilon(1e-12));

  // (xi^2 + delta^2)^{(p-2)/2} xi^2 < |xi|^p for p < 2, so smoothing loses coercivity near 0
  const CheckResult sm = check_coercivity(SmoothedFluxSpec{make_prototype_flux({{1.5, 1.8}}), 0.1}, 10000, rng);
  CHECK(sm.statistic < 1.0);
  CHECK_FALSE(sm.passed);
  CHECK_FALSE(sm.witness.empty());

  CHECK_THROWS_AS(check_coercivity(make_prototype_flux({{1.5, 1.8}}), 10, rng), std::invalid_argument);
}

TEST_CASE("monotonicity check") {
  Rng rng(2);
  CHECK(check_monotonicity(make_prototype_flux({{2.0, 2.0, 2.0}}), 10000, rng).passed);
  CHECK(check_monotonicity(make_prototype_flux({{3.0, 1.5}}), 100000, rng).passed);
  CHECK(check_monotonicity(make_prototype_flux({{1.5, 1.8}}, 1.0, 0.5), 10000, rng).passed);

  const FluxFunction reversed = [](std::span<const double>, double, std::span<const double> xi, std::span<double> out) {
    for (std::size_t j = 0; j < xi.size(); ++j) out[j] = -xi[j];
  };
  const CheckResult bad = check_monotonicity(reversed, {{1.5, 1.8}}, 1000, rng);
  CHECK_FALSE(bad.passed);
  CHECK(bad.witness.find("xihat") != std::string::npos);
}

TEST_CASE("growth check accepts the prototype and rejects a cubic flux at p = 2") {
  Rng rng(3);
  CHECK(check_growth(make_prototype_flux({{1.5, 1.8}}), 100000, rng).passed);
  CHECK(check_growth(make_prototype_flux({{1.2, 1.5, 2.0}}, 2.0, 0.7), 10000, rng).passed);

  FluxSpec cubic;
  cubic.exponents = {{2.0, 2.0, 2.0}};
  cubic.kind = FluxKind::custom;
  cubic.custom = [](std::span<const double>, double, std::span<const double> xi, std::span<double> out) {
    for (std::size_t j = 0; j < xi.size(); ++j) out[j] = xi[j] * xi[j] * xi[j];
  };
  const CheckResult r = check_growth(cubic, 10000, rng);
  CHECK_FALSE(r.passed);
  CHECK_FALSE(r.witness.empty());
}

TEST_CASE("finite-difference Jacobian of the smoothed flux is symmetric positive semidefinite") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const FluxSpec s = make_prototype_flux({{1.2, 1.5, 2.5}});
  const double delta = 0.2, step = 1e-6;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> xi{u(rng), u(rng), u(rng)};
    Eigen::Matrix3d jac;
    for (int l = 0; l < 3; ++l) {
      std::vector<double> hi = xi, lo = xi;
      hi[l] += step;
      lo[l] -= step;
      const auto ah = eval_smoothed(s, delta, hi), al = eval_smoothed(s, delta, lo);
      for (int j = 0; j < 3; ++j) jac(j, l) = (ah[j] - al[j]) / (2.0 * step);
    }
    CHECK((jac - jac.transpose()).norm() <= 1e-7 * (1.0 + jac.norm()));
    const Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(0.5 * (jac + jac.transpose())).eigenvalues();
    CHECK(ev.minCoeff() >= -1e-8);
  }
}

TEST_CASE("analytic xi-derivative matches central differences") {
  const FluxSpec s = make_prototype_flux({{1.4, 2.6}}, 1.5, 0.4);
  for (double delta : {0.0, 1e-3, 0.5}) {
    for (double xi : {-2.0, -0.3, 0.7, 4.0}) {
      for (int j = 0; j < 2; ++j) {
        const double h = 1e-6;
        const double fd = (flux_component(s, j, 0.8, xi + h, delta).value -
                           flux_component(s, j, 0.8, xi - h, delta).value) /
                          (2 * h);
        CHECK(flux_component(s, j, 0.8, xi, delta).d_xi == doctest::Approx(fd).epsilon(1e-6));
        const double fdt = (flux_component(s, j, 0.8 + h, xi, delta).value -
                            flux_component(s, j, 0.8 - h, xi, delta).value) /
                           (2 * h);
        CHECK(flux_component(s, j, 0.8, xi, delta).d_t == doctest::Approx(fdt).epsilon(1e-6));
      }
    }
  }
}
