#include "anisolab/source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace anisolab {

BOperatorSpec make_zero_b(const Grid& grid) {
  BOperatorSpec spec;
  spec.F = Field(grid);
  spec.g = Field(grid);
  return spec;
}

Validation validate_p1_constants(const P1Constants& c, const ExponentVector& p) {
  const DerivedExponents d = derive(p);
  if (!(c.C > 0.0)) return {false, "C > 0 fails"};
  if (!(c.s >= 1.0 && c.s < d.pstar)) return {false, "1 <= s < p* fails"};
  if (!(c.a0 >= 0.0)) return {false, "a0 >= 0 fails"};
  if (c.a0 > 0.0) {
    if (!(c.b > 0.0 && c.b < p[0] - 1.0)) return {false, "0 < b < p_1 - 1 fails (a0 > 0)"};
  } else if (!(c.b > 0.0 && c.b < p[0] / d.p_global_prime)) {
    return {false, "0 < b < p_1/p' fails (a0 = 0)"};
  }
  return {};
}

namespace {

void require_grid(const BOperatorSpec& spec, const Field& u, const char* what) {
  if (!(spec.F.grid() == u.grid())) throw std::invalid_argument(std::string("grid mismatch in ") + what);
}

}  // namespace

Field psi_field(const BOperatorSpec& spec, const Field& u) {
  Field out(u.grid());
  switch (spec.psi) {
    case PsiKind::zero:
      break;
    case PsiKind::bounded:
      for (std::size_t i = 0; i < u.size(); ++i) out[i] = spec.g[i] * u[i] / (1.0 + std::abs(u[i]));
      break;
    case PsiKind::custom:
      for (std::size_t i = 0; i < u.size(); ++i) out[i] = spec.psi_custom(u[i], spec.g.size() ? spec.g[i] : 1.0);
      break;
  }
  return out;
}

Field psi_derivative(const BOperatorSpec& spec, const Field& u) {
  Field out(u.grid());
  switch (spec.psi) {
    case PsiKind::zero:
      break;
    case PsiKind::bounded:
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double q = 1.0 + std::abs(u[i]);
        out[i] = spec.g[i] / (q * q);
      }
      break;
    case PsiKind::custom:
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double gi = spec.g.size() ? spec.g[i] : 1.0;
        const double hu = 1e-6 * (1.0 + std::abs(u[i]));
        out[i] = (spec.psi_custom(u[i] + hu, gi) - spec.psi_custom(u[i] - hu, gi)) / (2.0 * hu);
      }
      break;
  }
  return out;
}

double b_apply(const BOperatorSpec& spec, const Field& u, const Field& v) {
  require_grid(spec, u, "b_apply");
  require_grid(spec, v, "b_apply");
  double out = inner(spec.F, v);
  for (const FaceField& hj : spec.H) out += inner(hj, forward_diff(v, hj.axis()));
  if (spec.psi != PsiKind::zero) out += inner(psi_field(spec, u), v);
  return out;
}

Field b_dual_vector(const BOperatorSpec& spec, const Field& u) {
  require_grid(spec, u, "b_dual_vector");
  Field out = spec.F;
  if (!spec.H.empty()) out += divergence_adjoint(spec.H);
  if (spec.psi != PsiKind::zero) out += psi_field(spec, u);
  return out;
}

Field singular_profile(const Grid& grid, std::span<const double> x0, double alpha, double amplitude) {
  if (!(alpha >= 0.0 && alpha < grid.dim())) throw std::invalid_argument("singular_profile: need 0 <= alpha < N");
  const int dim = grid.dim();
  auto point_value = [&](std::span<const double> x) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (x[static_cast<std::size_t>(a)] - x0[static_cast<std::size_t>(a)]) *
                                        (x[static_cast<std::size_t>(a)] - x0[static_cast<std::size_t>(a)]);
    return amplitude * std::pow(r2, -0.5 * alpha);
  };
  Field f(grid);
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
    const auto x = grid.node_coord(i);
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += std::pow(x[static_cast<std::size_t>(a)] - x0[static_cast<std::size_t>(a)], 2);
    if (r2 < best) {
      best = r2;
      nearest = i;
    }
    if (r2 > 0.0) f[i] = point_value(std::span<const double>(x.data(), static_cast<std::size_t>(dim)));
  }
  // Midpoint rule on a sub-lattice of the nearest node's cell; sub-cell centres
  // never coincide with the cell centre.
  const int sub = dim == 2 ? 256 : 64;
  const auto xc = grid.node_coord(nearest);
  const double h = grid.h();
  std::array<double, 3> y{0.0, 0.0, 0.0};
  double acc = 0.0;
  std::size_t count = 0;
  const int kmax = dim == 3 ? sub : 1;
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j < sub; ++j)
      for (int i = 0; i < sub; ++i) {
        y[0] = xc[0] + h * ((i + 0.5) / sub - 0.5);
        y[1] = xc[1] + h * ((j + 0.5) / sub - 0.5);
        if (dim == 3) y[2] = xc[2] + h * ((k + 0.5) / sub - 0.5);
        acc += point_value(std::span<const double>(y.data(), static_cast<std::size_t>(dim)));
        ++count;
      }
  f[nearest] = acc / static_cast<double>(count);
  return f;
}

Field f_reg(const DatumSpec& datum, double epsilon) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("f_reg: epsilon must be >= 0");
  Field out = datum.f;
  if (epsilon == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] / (1.0 + epsilon * std::abs(out[i]));
  return out;
}

Field random_smooth_field(const Grid& grid, Rng& rng, int modes) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Field out(grid);
  const int dim = grid.dim();
  for (int k = 1; k <= modes; ++k)
    for (int l = 1; l <= modes; ++l) {
      const int kz_max = dim == 3 ? modes : 1;
      for (int kz = 1; kz <= kz_max; ++kz) {
        const double coef = normal(rng) / (k * l * kz);
        for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
          const auto x = grid.node_coord(i);
          double v = std::sin(std::numbers::pi * k * x[0]) * std::sin(std::numbers::pi * l * x[1]);
          if (dim == 3) v *= std::sin(std::numbers::pi * kz * x[2]);
          out[i] += coef * v;
        }
      }
    }
  return out;
}

P1Report check_P1(const BOperatorSpec& spec, const ExponentVector& p, std::size_t cloud_size, Rng& rng) {
  if (cloud_size < 100) throw std::invalid_argument("check_P1: cloud size must be >= 100");
  const Grid& grid = spec.F.grid();
  P1Report rep;
  rep.pairs = cloud_size;
  for (int e = -2; e <= 4; ++e) rep.amplitudes.push_back(std::pow(10.0, e));
  rep.ratio_by_amplitude.assign(rep.amplitudes.size(), 0.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < cloud_size; ++s) {
    const std::size_t bucket = s % rep.amplitudes.size();
    Field u = random_smooth_field(grid, rng);
    u *= rep.amplitudes[bucket] / std::max(u.max_abs(), 1e-300);
    Field v = random_smooth_field(grid, rng);
    v *= std::pow(10.0, 4.0 * unit(rng) - 2.0) / std::max(v.max_abs(), 1e-300);
    const double lhs = std::abs(b_apply(spec, u, v));
    const double rhs = (1.0 + std::pow(anisotropic_norm(u, p), spec.p1.b)) *
                       (spec.p1.a0 * anisotropic_norm(v, p) + lq_norm(v, spec.p1.s));
    const double ratio = lhs / rhs;
    rep.ratio_by_amplitude[bucket] = std::max(rep.ratio_by_amplitude[bucket], ratio);
    rep.fitted_C = std::max(rep.fitted_C, ratio);
  }
  rep.finite_fit = rep.fitted_C < 1e6;
  // Compare the largest-amplitude bucket against the worst bucket with amplitude <= 1.
  double small = 0.0;
  for (std::size_t b = 0; b < rep.amplitudes.size(); ++b)
    if (rep.amplitudes[b] <= 1.0) small = std::max(small, rep.ratio_by_amplitude[b]);
  rep.growth_in_u = rep.ratio_by_amplitude.back() > 10.0 * std::max(small, 1e-300) && rep.ratio_by_amplitude.back() > 0.0;
  return rep;
}

}  // namespace anisolab
