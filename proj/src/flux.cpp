#include "anisolab/flux.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace anisolab {

FluxSpec make_prototype_flux(const ExponentVector& p, double scale, double coupling) {
  FluxSpec spec;
  spec.exponents = p;
  spec.kind = coupling == 0.0 ? FluxKind::prototype : FluxKind::coupled;
  spec.scale = scale;
  spec.coupling = coupling;
  spec.nu0 = scale;
  spec.nu = scale * (1.0 + std::abs(coupling));
  return spec;
}

namespace {

double coupling_factor(const FluxSpec& spec, double t, double* d_t) {
  if (spec.kind != FluxKind::coupled) {
    if (d_t) *d_t = 0.0;
    return 1.0;
  }
  const double q = 1.0 + t * t;
  if (d_t) *d_t = spec.coupling * 2.0 * t / (q * q);
  return 1.0 + spec.coupling * t * t / q;
}

}  // namespace

FluxComponent flux_component(const FluxSpec& spec, int j, double t, double xi, double delta) {
  if (spec.kind == FluxKind::custom) throw std::logic_error("flux_component: custom fluxes are check-only");
  const double p = spec.exponents[j];
  double dc = 0.0;
  const double c = spec.scale * coupling_factor(spec, t, &dc);
  dc *= spec.scale;
  FluxComponent out;
  double base = 0.0, dbase = 0.0;
  if (delta > 0.0) {
    const double r2 = xi * xi + delta * delta;
    const double w = std::pow(r2, 0.5 * (p - 2.0));
    base = w * xi;
    dbase = w / r2 * ((p - 1.0) * xi * xi + delta * delta);
  } else if (p == 2.0) {
    base = xi;
    dbase = 1.0;
  } else if (xi == 0.0) {
    base = 0.0;
    dbase = p < 2.0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    const double a = std::abs(xi);
    const double m = std::pow(a, p - 1.0);
    base = std::copysign(m, xi);
    dbase = (p - 1.0) * m / a;
  }
  out.value = c * base;
  out.d_xi = c * dbase;
  out.d_t = dc * base;
  return out;
}

std::vector<double> flux_eval(const FluxSpec& spec, std::span<const double> x, double t, std::span<const double> xi) {
  std::vector<double> out(xi.size(), 0.0);
  if (spec.kind == FluxKind::custom) {
    spec.custom(x, t, xi, out);
    return out;
  }
  for (std::size_t j = 0; j < xi.size(); ++j) out[j] = flux_component(spec, static_cast<int>(j), t, xi[j]).value;
  return out;
}

std::vector<double> flux_eval_smoothed(const SmoothedFluxSpec& spec, std::span<const double> x, double t,
                                       std::span<const double> xi) {
  if (!(spec.delta >= 0.0)) throw std::invalid_argument("smoothed flux: delta must be >= 0");
  if (spec.base.kind == FluxKind::custom) return flux_eval(spec.base, x, t, xi);
  std::vector<double> out(xi.size(), 0.0);
  for (std::size_t j = 0; j < xi.size(); ++j)
    out[j] = flux_component(spec.base, static_cast<int>(j), t, xi[j], spec.delta).value;
  return out;
}

FluxFunction as_function(const FluxSpec& spec) {
  return [spec](std::span<const double> x, double t, std::span<const double> xi, std::span<double> out) {
    const auto v = flux_eval(spec, x, t, xi);
    std::copy(v.begin(), v.end(), out.begin());
  };
}

FluxFunction as_function(const SmoothedFluxSpec& spec) {
  return [spec](std::span<const double> x, double t, std::span<const double> xi, std::span<double> out) {
    const auto v = flux_eval_smoothed(spec, x, t, xi);
    std::copy(v.begin(), v.end(), out.begin());
  };
}

namespace {

double power_sum(const ExponentVector& p, std::span<const double> xi) {
  double s = 0.0;
  for (int j = 0; j < p.dim(); ++j) s += std::pow(std::abs(xi[static_cast<std::size_t>(j)]), p[j]);
  return s;
}

void require_samples(std::size_t n, const char* what) {
  if (n < 1000) throw std::invalid_argument(std::string(what) + ": at least 1000 samples required");
}

}  // namespace

CheckResult check_coercivity(const FluxFunction& flux, const ExponentVector& p, double nu0, std::size_t samples,
                             Rng& rng) {
  require_samples(samples, "check_coercivity");
  const auto n = static_cast<std::size_t>(p.dim());
  std::vector<double> x(n), xi(n), a(n);
  CheckResult res{"coercivity", true, std::numeric_limits<double>::infinity(), samples, {}};
  std::string worst;
  for (std::size_t s = 0; s < samples; ++s) {
    sample_point(rng, x);
    const double t = sample_signed_magnitude(rng);
    sample_vector(rng, xi);
    const double denom = power_sum(p, xi);
    if (denom == 0.0) continue;
    flux(x, t, xi, a);
    double num = 0.0;
    for (std::size_t j = 0; j < n; ++j) num += a[j] * xi[j];
    const double ratio = num / denom;
    if (ratio < res.statistic) {
      res.statistic = ratio;
      worst = format_sample(x, t, xi);
    }
  }
  res.passed = res.statistic > 0.0 && res.statistic >= nu0 * (1.0 - 1e-12);
  if (!res.passed) res.witness = worst;
  return res;
}

CheckResult check_coercivity(const FluxSpec& spec, std::size_t samples, Rng& rng) {
  return check_coercivity(as_function(spec), spec.exponents, spec.nu0, samples, rng);
}

CheckResult check_coercivity(const SmoothedFluxSpec& spec, std::size_t samples, Rng& rng) {
  return check_coercivity(as_function(spec), spec.base.exponents, spec.base.nu0, samples, rng);
}

CheckResult check_monotonicity(const FluxFunction& flux, const ExponentVector& p, std::size_t pairs, Rng& rng) {
  require_samples(pairs, "check_monotonicity");
  const auto n = static_cast<std::size_t>(p.dim());
  std::vector<double> x(n), xi(n), xh(n), a(n), ah(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CheckResult res{"monotonicity", true, std::numeric_limits<double>::infinity(), pairs, {}};
  for (std::size_t s = 0; s < pairs; ++s) {
    sample_point(rng, x);
    const double t = sample_signed_magnitude(rng);
    sample_vector(rng, xi);
    // Half the pairs are nearby perturbations, the rest independent draws.
    if (unit(rng) < 0.5) {
      for (std::size_t j = 0; j < n; ++j) xh[j] = xi[j] + (unit(rng) - 0.5) * 1e-2 * (1.0 + std::abs(xi[j]));
    } else {
      sample_vector(rng, xh);
    }
    flux(x, t, xi, a);
    flux(x, t, xh, ah);
    double prod = 0.0, gap = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      prod += (a[j] - ah[j]) * (xi[j] - xh[j]);
      gap = std::max(gap, std::abs(xi[j] - xh[j]));
      scale = std::max({scale, std::abs(xi[j]), std::abs(xh[j])});
    }
    res.statistic = std::min(res.statistic, prod);
    const bool distinct = gap > 1e-14 * (1.0 + scale);
    const bool ok = distinct ? prod > 0.0 : prod >= -1e-14;
    if (!ok && res.passed) {
      res.passed = false;
      res.witness = format_sample(x, t, xi) + " xihat=" + format_vector(xh);
    }
  }
  return res;
}

CheckResult check_monotonicity(const FluxSpec& spec, std::size_t pairs, Rng& rng) {
  return check_monotonicity(as_function(spec), spec.exponents, pairs, rng);
}

CheckResult check_growth(const FluxSpec& spec, std::size_t samples, Rng& rng) {
  require_samples(samples, "check_growth");
  const ExponentVector& p = spec.exponents;
  const auto n = static_cast<std::size_t>(p.dim());
  std::vector<double> pprime(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(p.p[j] > 1.0)) throw std::invalid_argument("check_growth: every p_j must exceed 1");
    pprime[j] = p.p[j] / (p.p[j] - 1.0);
  }
  // With p >= N there is no finite p*; the |t| term is dropped, which only tightens the bound.
  const double h = harmonic_mean(p);
  const double pstar = h < p.dim() ? p.dim() * h / (p.dim() - h) : 0.0;
  std::vector<double> x(n), xi(n);
  CheckResult res{"growth", true, std::numeric_limits<double>::infinity(), samples, {}};
  for (std::size_t s = 0; s < samples; ++s) {
    sample_point(rng, x);
    const double t = sample_signed_magnitude(rng);
    sample_vector(rng, xi);
    const auto a = flux_eval(spec, x, t, xi);
    const double ps = power_sum(p, xi);
    for (std::size_t j = 0; j < n; ++j) {
      const double eta = spec.eta.empty() ? 0.0 : spec.eta[j](x);
      const double bound =
          spec.nu * (eta + (pstar > 0.0 ? std::pow(std::abs(t), pstar / pprime[j]) : 0.0) + std::pow(ps, 1.0 / pprime[j]));
      // statistic: smallest relative slack (bound - |A_j|) / bound
      const double slack = bound > 0.0 ? (bound - std::abs(a[j])) / bound : -std::abs(a[j]);
      res.statistic = std::min(res.statistic, slack);
      if (std::abs(a[j]) > bound * (1.0 + 1e-12) && res.passed) {
        res.passed = false;
        res.witness = format_sample(x, t, xi) + " component=" + std::to_string(j);
      }
    }
  }
  return res;
}

}  // namespace anisolab
