#include "anisolab/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "anisolab/grid.hpp"

namespace anisolab {

double harmonic_mean(const ExponentVector& p) {
  double s = 0.0;
  for (double pj : p.p) s += 1.0 / pj;
  return p.dim() / s;
}

Validation validate(const ExponentVector& p) {
  auto fail = [](std::string why) { return Validation{false, std::move(why)}; };
  if (p.p.empty()) return fail("exponent list is empty");
  if (p.dim() != 2 && p.dim() != 3) return fail("dimension N must be 2 or 3");
  for (int j = 0; j < p.dim(); ++j) {
    if (!std::isfinite(p[j])) return fail("p_" + std::to_string(j + 1) + " is not finite");
    if (!(p[j] > 1.0)) return fail("p_" + std::to_string(j + 1) + " > 1 fails");
  }
  for (int j = 0; j + 1 < p.dim(); ++j)
    if (!(p[j] <= p[j + 1])) return fail("p_" + std::to_string(j + 1) + " <= p_" + std::to_string(j + 2) + " fails");
  if (!(harmonic_mean(p) < p.dim())) return fail("p<N fails");
  return {};
}

DerivedExponents derive(const ExponentVector& p) {
  if (auto v = validate(p); !v) throw std::invalid_argument("invalid exponents: " + v.violation);
  DerivedExponents d;
  const double n = p.dim();
  d.p = harmonic_mean(p);
  d.pstar = n * d.p / (n - d.p);
  d.pprime.reserve(p.p.size());
  for (double pj : p.p) d.pprime.push_back(pj / (pj - 1.0));
  d.p_global_prime = d.p / (d.p - 1.0);
  return d;
}

SobolevQuotients sobolev_quotient(const Field& u, const ExponentVector& p) {
  const DerivedExponents d = derive(p);
  const int n = p.dim();
  if (u.grid().dim() != n) throw std::invalid_argument("sobolev_quotient: dimension mismatch");
  double log_geo = 0.0;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double nj = lq_norm(forward_diff(u, j), p[j]);
    if (nj == 0.0) throw std::invalid_argument("sobolev_quotient: zero field has no finite quotient");
    log_geo += std::log(nj) / n;
    sum += nj;
  }
  const double top = lq_norm(u, d.pstar);
  return {top / std::exp(log_geo), top / (sum / n)};
}

double young_last_exponent(std::span<const double> leading) {
  if (leading.empty()) throw std::invalid_argument("young: need at least one leading exponent");
  double s = 0.0;
  for (double r : leading) {
    if (!(r > 1.0) || !std::isfinite(r)) throw std::invalid_argument("young: every R_k must satisfy 1 < R_k < inf");
    s += 1.0 / r;
  }
  if (!(s < 1.0)) throw std::invalid_argument("young: sum of 1/R_k must be < 1");
  return 1.0 / (1.0 - s);
}

namespace {

// With beta_N fixed to 1 the objective is prod_{k<N} beta_k - delta sum beta_k^{R_k};
// the full ratio is invariant under beta_k -> lambda^{1/R_k} beta_k for all k.
double young_objective(std::span<const double> beta, std::span<const double> r, double delta) {
  double prod = 1.0, pen = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    prod *= beta[k];
    pen += std::pow(beta[k], r[k]);
  }
  return prod - delta * pen;
}

}  // namespace

double young_constant(std::span<const double> leading, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("young: delta must be positive");
  young_last_exponent(leading);
  const std::size_t m = leading.size();
  constexpr int kPoints = 65;
  const double lo = std::log(1e-6), hi = std::log(1e6);
  auto grid_value = [&](int i) { return std::exp(lo + (hi - lo) * i / (kPoints - 1)); };

  std::vector<int> idx(m, 0);
  std::vector<double> beta(m), best(m);
  double best_val = -std::numeric_limits<double>::infinity();
  for (;;) {
    for (std::size_t k = 0; k < m; ++k) beta[k] = grid_value(idx[k]);
    const double v = young_objective(beta, leading, delta);
    if (v > best_val) {
      best_val = v;
      best = beta;
    }
    std::size_t k = 0;
    while (k < m && ++idx[k] == kPoints) idx[k++] = 0;
    if (k == m) break;
  }

  // Coordinate ascent: for fixed others the objective P*b - delta*b^R is concave
  // in b with maximiser (P / (delta R))^{1/(R-1)}.
  beta = best;
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double change = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      double others = 1.0;
      for (std::size_t l = 0; l < m; ++l)
        if (l != k) others *= beta[l];
      const double next = std::pow(others / (delta * leading[k]), 1.0 / (leading[k] - 1.0));
      change = std::max(change, std::abs(std::log(next / beta[k])));
      beta[k] = next;
    }
    if (change < 1e-15) break;
  }
  return std::max(best_val, young_objective(beta, leading, delta));
}

}  // namespace anisolab
