#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "anisolab/exponents.hpp"
#include "anisolab/grid.hpp"

using namespace anisolab;

namespace {

// sup_a (a b - delta a^2) / b^2 over a fine 1-D grid, with b = 1.
double young_quadratic_oracle(double delta) {
  double best = -1e300;
  for (int i = 0; i <= 2000000; ++i) {
    const double a = 20.0 * i / 2000000.0;
    best = std::max(best, a - delta * a * a);
  }
  return best;
}

Field bump(int n) {
  return sample(Grid(2, n), [](std::span<const double> x) {
    return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]) * std::exp(x[0]);
  });
}

}  // namespace

TEST_CASE("validate accepts the model exponents and names the violated condition") {
  CHECK(validate({{1.5, 1.8}}).ok);
  CHECK(validate({{1.2, 1.5, 2.0}}).ok);

  const Validation v = validate({{2.0, 2.0}});
  CHECK_FALSE(v.ok);
  CHECK(v.violation.find("p<N fails") != std::string::npos);

  CHECK_FALSE(validate({{1.8, 1.5}}).ok);
  CHECK_FALSE(validate({{1.0, 1.5}}).ok);
  CHECK_FALSE(validate({{1.5, NAN}}).ok);
  CHECK_FALSE(validate({{1.5}}).ok);
  CHECK_FALSE(validate({{1.5, 1.5, 1.5, 1.5}}).ok);
}

TEST_CASE("derive returns the harmonic mean, Sobolev exponent and conjugates") {
  DerivedExponents d = derive({{1.5, 1.8}});
  CHECK(d.p == doctest::Approx(18.0 / 11.0).epsilon(1e-15));
  CHECK(d.pstar == doctest::Approx(9.0).epsilon(1e-13));

  d = derive({{1.2, 1.5, 2.0}});
  CHECK(d.p == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(d.pstar == doctest::Approx(3.0).epsilon(1e-14));

  d = derive({{1.5, 1.5}});
  CHECK(d.p == doctest::Approx(1.5));
  CHECK(d.pstar == doctest::Approx(6.0));
  REQUIRE(d.pprime.size() == 2);
  CHECK(d.pprime[0] == doctest::Approx(3.0));
  CHECK(d.pprime[1] == doctest::Approx(3.0));

  CHECK_THROWS_AS(derive({{2.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("validated exponents satisfy p_1 <= p <= p_N and p < p*") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1.01, 3.5);
  int accepted = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    const int n = 2 + trial % 2;
    std::vector<double> p(static_cast<std::size_t>(n));
    for (double& x : p) x = u(rng);
    std::sort(p.begin(), p.end());
    const ExponentVector e{p};
    if (!validate(e)) {
      CHECK_THROWS(derive(e));
      continue;
    }
    ++accepted;
    const DerivedExponents d = derive(e);
    CHECK(d.p >= p.front() - 1e-14);
    CHECK(d.p <= p.back() + 1e-14);
    CHECK(d.p < d.pstar);
  }
  CHECK(accepted > 1000);
}

TEST_CASE("young constant matches AM-GM and a 1-D numeric supremum") {
  const std::vector<double> r{2.0};
  CHECK(young_constant(r, 0.5) == doctest::Approx(0.5).epsilon(1e-9));
  const double oracle = young_quadratic_oracle(0.125);
  CHECK(oracle == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(young_constant(r, 0.125) == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("young inequality holds on a random cloud for N = 3") {
  const std::vector<double> r{3.0, 3.0};
  const double delta = 0.1;
  const double rn = young_last_exponent(r);
  CHECK(rn == doctest::Approx(3.0));
  const double c = young_constant(r, delta);
  CHECK(std::isfinite(c));
  CHECK(c > 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> e(-6.0, 6.0);
  for (int s = 0; s < 100000; ++s) {
    const double a = std::pow(10.0, e(rng)), b = std::pow(10.0, e(rng)), g = std::pow(10.0, e(rng));
    const double lhs = a * b * g;
    const double rhs = delta * (std::pow(a, 3) + std::pow(b, 3)) + c * std::pow(g, rn);
    REQUIRE(lhs <= rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("young rejects exponents outside the admissible range") {
  CHECK_THROWS_AS(young_constant(std::vector<double>{1.0}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(young_constant(std::vector<double>{2.0, 2.0}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(young_constant(std::vector<double>{2.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(young_constant(std::vector<double>{}, 0.5), std::invalid_argument);
}

TEST_CASE("sobolev quotients are positive, stable under refinement and ordered by AM-GM") {
  const ExponentVector p{{1.5, 1.8}};
  std::vector<double> products;
  for (int n : {15, 31, 63}) {
    const SobolevQuotients q = sobolev_quotient(bump(n), p);
    CHECK(q.product > 0.0);
    CHECK(q.sum > 0.0);
    CHECK(q.product <= 2.0 * q.sum * (1.0 + 1e-14));
    products.push_back(q.product);
  }
  for (std::size_t i = 1; i < products.size(); ++i)
    CHECK(std::abs(products[i] - products[i - 1]) <= 0.05 * products[i - 1]);

  Field spike(Grid(2, 9));
  spike[40] = 1.0;
  const SobolevQuotients q = sobolev_quotient(spike, p);
  CHECK(std::isfinite(q.product));
  CHECK(q.product > 0.0);

  CHECK_THROWS_AS(sobolev_quotient(Field(Grid(2, 9)), p), std::invalid_argument);
}

TEST_CASE("sobolev AM-GM ordering holds for random fields") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const ExponentVector p{{1.2, 1.5, 2.0}};
  for (int t = 0; t < 50; ++t) {
    Field u(Grid(3, 5));
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = g(rng);
    const SobolevQuotients q = sobolev_quotient(u, p);
    CHECK(q.product <= 3.0 * q.sum * (1.0 + 1e-14));
  }
}
