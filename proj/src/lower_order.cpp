#include "anisolab/lower_order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace anisolab {

double PiecewiseLinear::operator()(double t) const {
  if (knots.empty()) return 0.0;
  if (knots.size() == 1) return knots.front().second;
  auto seg = [&](std::size_t i) {
    const auto& [x0, y0] = knots[i];
    const auto& [x1, y1] = knots[i + 1];
    return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
  };
  if (t <= knots.front().first) return seg(0);
  if (t >= knots.back().first) return seg(knots.size() - 2);
  const auto it = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double v, const std::pair<double, double>& k) { return v < k.first; });
  return seg(static_cast<std::size_t>(it - knots.begin()) - 1);
}

ModelConstants model_constants(double m, double tau) {
  if (!(m > 1.0)) throw std::invalid_argument("model_constants: m must be > 1");
  if (!(tau > 0.0)) throw std::invalid_argument("model_constants: tau must be > 0");
  ModelConstants out;
  out.zeta = [m](double s) { return std::pow(std::max(1.0, s), m - 1.0); };
  out.c = 1.0;
  out.gamma = std::pow(tau, m - 1.0);
  return out;
}

LowerOrderSpec make_model_phi(const ExponentVector& p, double m, double tau) {
  const ModelConstants mc = model_constants(m, tau);
  LowerOrderSpec spec;
  spec.exponents = p;
  spec.kind = PhiKind::model;
  spec.m = m;
  spec.zeta = mc.zeta;
  spec.c = [c = mc.c](std::span<const double>) { return c; };
  spec.gamma = mc.gamma;
  spec.tau = tau;
  return spec;
}

LowerOrderSpec make_zero_phi(const ExponentVector& p) {
  LowerOrderSpec spec;
  spec.exponents = p;
  spec.kind = PhiKind::zero;
  spec.zeta = [](double) { return 0.0; };
  return spec;
}

namespace {

double power_sum(const ExponentVector& p, std::span<const double> xi) {
  double s = 0.0;
  for (int j = 0; j < p.dim(); ++j) s += std::pow(std::abs(xi[static_cast<std::size_t>(j)]), p[j]);
  return s;
}

double signed_power(double t, double e) { return t == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(t), e), t); }

}  // namespace

LowerOrderSpec make_table_phi(const ExponentVector& p, PiecewiseLinear g) {
  LowerOrderSpec spec;
  spec.exponents = p;
  spec.kind = PhiKind::custom;
  spec.custom = [p, g = std::move(g)](std::span<const double>, double t, std::span<const double> xi) {
    return g(t) * (power_sum(p, xi) + 1.0);
  };
  return spec;
}

double phi_eval(const LowerOrderSpec& spec, std::span<const double> x, double t, std::span<const double> xi) {
  switch (spec.kind) {
    case PhiKind::zero:
      return 0.0;
    case PhiKind::model:
      return (power_sum(spec.exponents, xi) + 1.0) * signed_power(t, spec.m - 1.0);
    case PhiKind::custom:
      return spec.custom(x, t, xi);
  }
  return 0.0;
}

double regularize(double phi, double epsilon) { return phi / (1.0 + epsilon * std::abs(phi)); }

double phi_reg(const RegularizedLowerOrder& reg, std::span<const double> x, double t, std::span<const double> xi) {
  if (!(reg.epsilon > 0.0)) throw std::invalid_argument("phi_reg: epsilon must be > 0");
  return regularize(phi_eval(reg.base, x, t, xi), reg.epsilon);
}

PhiPartials phi_partials(const LowerOrderSpec& spec, std::span<const double> x, double t,
                         std::span<const double> xi, double epsilon, double t_floor) {
  const std::size_t n = xi.size();
  PhiPartials out;
  out.d_xi.assign(n, 0.0);
  double phi = 0.0;
  switch (spec.kind) {
    case PhiKind::zero:
      return out;
    case PhiKind::model: {
      const double s = power_sum(spec.exponents, xi) + 1.0;
      const double g = signed_power(t, spec.m - 1.0);
      phi = s * g;
      const double at = std::max(std::abs(t), t_floor);
      out.d_t = at > 0.0 ? s * (spec.m - 1.0) * std::pow(at, spec.m - 2.0) : 0.0;
      for (std::size_t j = 0; j < n; ++j)
        out.d_xi[j] = g * spec.exponents[static_cast<int>(j)] *
                      signed_power(xi[j], spec.exponents[static_cast<int>(j)] - 1.0);
      break;
    }
    case PhiKind::custom: {
      phi = spec.custom(x, t, xi);
      const double ht = 1e-6 * (1.0 + std::abs(t));
      out.d_t = (spec.custom(x, t + ht, xi) - spec.custom(x, t - ht, xi)) / (2.0 * ht);
      std::vector<double> xp(xi.begin(), xi.end()), xm(xi.begin(), xi.end());
      for (std::size_t j = 0; j < n; ++j) {
        const double hx = 1e-6 * (1.0 + std::abs(xi[j]));
        xp[j] = xi[j] + hx;
        xm[j] = xi[j] - hx;
        out.d_xi[j] = (spec.custom(x, t, xp) - spec.custom(x, t, xm)) / (2.0 * hx);
        xp[j] = xm[j] = xi[j];
      }
      break;
    }
  }
  if (epsilon > 0.0) {
    const double q = 1.0 + epsilon * std::abs(phi);
    const double chain = 1.0 / (q * q);
    out.value = phi / q;
    out.d_t *= chain;
    for (double& d : out.d_xi) d *= chain;
  } else {
    out.value = phi;
  }
  return out;
}

namespace {

void require_samples(std::size_t n, const char* what) {
  if (n < 1000) throw std::invalid_argument(std::string(what) + ": at least 1000 samples required");
}

double c_at(const LowerOrderSpec& spec, std::span<const double> x) { return spec.c ? spec.c(x) : 1.0; }

template <class Body>
CheckResult run_cloud(const LowerOrderSpec& spec, const char* name, std::size_t samples, Rng& rng, Body&& body) {
  require_samples(samples, name);
  const auto n = static_cast<std::size_t>(spec.exponents.dim());
  std::vector<double> x(n), xi(n);
  CheckResult res{name, true, std::numeric_limits<double>::infinity(), samples, {}};
  for (std::size_t s = 0; s < samples; ++s) {
    sample_point(rng, x);
    const double t = sample_signed_magnitude(rng);
    sample_vector(rng, xi);
    const auto [ok, stat] = body(x, t, xi);
    res.statistic = std::min(res.statistic, stat);
    if (!ok && res.passed) {
      res.passed = false;
      res.witness = format_sample(x, t, xi);
    }
  }
  return res;
}

}  // namespace

CheckResult check_sign(const LowerOrderSpec& spec, std::size_t samples, Rng& rng) {
  return run_cloud(spec, "phi_sign", samples, rng, [&](auto x, double t, auto xi) {
    const double v = phi_eval(spec, x, t, xi) * t;
    return std::pair{v >= 0.0, v};
  });
}

CheckResult check_growth_phi(const LowerOrderSpec& spec, std::size_t samples, Rng& rng) {
  if (!spec.zeta) throw std::invalid_argument("check_growth_phi: zeta not set");
  return run_cloud(spec, "phi_growth", samples, rng, [&](auto x, double t, auto xi) {
    const double a = std::abs(phi_eval(spec, x, t, xi));
    const double bound = spec.zeta(std::abs(t)) * (power_sum(spec.exponents, xi) + c_at(spec, x));
    const double slack = bound > 0.0 ? (bound - a) / bound : -a;
    return std::pair{a <= bound * (1.0 + 1e-12), slack};
  });
}

CheckResult check_lower_bound(const LowerOrderSpec& spec, std::size_t samples, Rng& rng) {
  if (!(spec.gamma > 0.0) || !(spec.tau > 0.0))
    throw std::invalid_argument("check_lower_bound: gamma and tau must be positive");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return run_cloud(spec, "phi_lower_bound", samples, rng, [&](auto x, double t, auto xi) {
    // Redraw t on |t| >= tau: tau * 10^{U(0,3)} with random sign.
    const double tt = std::copysign(spec.tau * std::pow(10.0, 3.0 * unit(rng)), t == 0.0 ? 1.0 : t);
    const double a = std::abs(phi_eval(spec, x, tt, xi));
    const double bound = spec.gamma * power_sum(spec.exponents, xi);
    const double slack = a > 0.0 ? (a - bound) / a : -bound;
    return std::pair{a >= bound * (1.0 - 1e-12), slack};
  });
}

CheckResult check_zeta_monotone(const LowerOrderSpec& spec, double s_max, std::size_t points) {
  if (!spec.zeta) throw std::invalid_argument("check_zeta_monotone: zeta not set");
  CheckResult res{"zeta_monotone", true, std::numeric_limits<double>::infinity(), points, {}};
  double prev = spec.zeta(0.0);
  for (std::size_t i = 1; i < points; ++i) {
    const double s = s_max * static_cast<double>(i) / static_cast<double>(points - 1);
    const double v = spec.zeta(s);
    res.statistic = std::min(res.statistic, v - prev);
    if (v < prev && res.passed) {
      res.passed = false;
      res.witness = "s=" + std::to_string(s);
    }
    prev = v;
  }
  return res;
}

bool admissible_for_solver(const LowerOrderSpec& spec, Rng& rng) {
  if (spec.kind != PhiKind::custom) return true;
  constexpr std::size_t kSamples = 100000;
  return check_sign(spec, kSamples, rng).passed && check_growth_phi(spec, kSamples, rng).passed &&
         check_lower_bound(spec, kSamples, rng).passed;
}

}  // namespace anisolab
