#pragma once

#include <span>
#include <string>
#include <vector>

namespace anisolab {

class Field;

/// Anisotropy exponents (p_1, ..., p_N), one per coordinate direction.
struct ExponentVector {
  std::vector<double> p;

  int dim() const { return static_cast<int>(p.size()); }
  double operator[](int j) const { return p[static_cast<std::size_t>(j)]; }
  bool operator==(const ExponentVector&) const = default;
};

struct DerivedExponents {
  double p = 0.0;               // harmonic mean N / sum(1/p_j)
  double pstar = 0.0;           // anisotropic Sobolev exponent N p / (N - p)
  std::vector<double> pprime;   // conjugates p_j / (p_j - 1)
  double p_global_prime = 0.0;  // conjugate of the harmonic mean
};

struct Validation {
  bool ok = true;
  std::string violation;

  explicit operator bool() const { return ok; }
};

/// Checks 1 < p_1 <= ... <= p_N, harmonic mean p < N, and N in {2, 3}.
Validation validate(const ExponentVector& p);

double harmonic_mean(const ExponentVector& p);

/// Throws std::invalid_argument with the violation text if validate() fails.
DerivedExponents derive(const ExponentVector& p);

struct SobolevQuotients {
  double product = 0.0;  // ||u||_{p*} / prod_j ||d_j u||_{p_j}^{1/N}
  double sum = 0.0;      // ||u||_{p*} / ((1/N) sum_j ||d_j u||_{p_j})
};

/// Discrete anisotropic Sobolev quotients of a zero-trace grid field.
SobolevQuotients sobolev_quotient(const Field& u, const ExponentVector& p);

/// Constant C such that prod(beta) <= delta * sum_{k<N} beta_k^{R_k} + C * beta_N^{R_N}
/// with R_N = (1 - sum 1/R_k)^{-1}. `leading` holds R_1..R_{N-1}.
///
/// The supremum of (prod(beta) - delta * sum beta_k^{R_k}) / beta_N^{R_N} is taken
/// over a log-spaced grid (65 points per axis on [1e-6, 1e6]) and then polished by
/// a local search in log coordinates around the best grid point.
double young_constant(std::span<const double> leading, double delta);

/// R_N for the given leading exponents; throws if the constraint fails.
double young_last_exponent(std::span<const double> leading);

}  // namespace anisolab
