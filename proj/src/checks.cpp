#include "anisolab/checks.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace anisolab {

double sample_signed_magnitude(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < 0.1) return 0.0;
  const double mag = std::pow(10.0, -3.0 + 6.0 * unit(rng));
  return unit(rng) < 0.5 ? -mag : mag;
}

void sample_point(Rng& rng, std::span<double> x) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& v : x) v = unit(rng);
}

void sample_vector(Rng& rng, std::span<double> xi) {
  for (double& v : xi) v = sample_signed_magnitude(rng);
}

std::string format_vector(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  os << ")";
  return os.str();
}

std::string format_sample(std::span<const double> x, double t, std::span<const double> xi) {
  std::ostringstream os;
  os.precision(17);
  os << "x=(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? " " : "") << x[i];
  os << ") t=" << t << " xi=(";
  for (std::size_t i = 0; i < xi.size(); ++i) os << (i ? " " : "") << xi[i];
  os << ")";
  return os.str();
}

}  // namespace anisolab
