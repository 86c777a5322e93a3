#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace anisolab {

/// Outcome of a randomized structural check.
struct CheckResult {
  std::string name;
  bool passed = true;
  double statistic = 0.0;  // check-specific: infimum ratio, worst slack, fitted constant
  std::size_t samples = 0;
  std::string witness;     // first/worst violating sample, empty when passed
};

using Rng = std::mt19937_64;

/// Sampling helpers shared by the pointwise checkers. Magnitudes are
/// log-uniform on [1e-3, 1e3] with random sign; a tenth of the draws are 0.
double sample_signed_magnitude(Rng& rng);
void sample_point(Rng& rng, std::span<double> x);
void sample_vector(Rng& rng, std::span<double> xi);

std::string format_vector(std::span<const double> v);
std::string format_sample(std::span<const double> x, double t, std::span<const double> xi);

}  // namespace anisolab
