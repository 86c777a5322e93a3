#pragma once

#include <array>
#include <functional>
#include <vector>

#include "anisolab/checks.hpp"
#include "anisolab/exponents.hpp"
#include "anisolab/grid.hpp"

namespace anisolab {

enum class PsiKind {
  zero,
  bounded,  // g(x) u / (1 + |u|)
  custom,
};

/// Constants of the growth bound |<Bu, v>| <= C (1 + ||u||^b) (a0 ||v|| + ||v||_{L^s}).
struct P1Constants {
  double C = 1.0;
  double s = 1.0;
  double a0 = 0.0;
  double b = 0.5;
  bool operator==(const P1Constants&) const = default;
};

/// <Bu, v> = <F, v> + sum_j <H_j, d_j v> + <psi(u), v>, i.e. h = -div H.
struct BOperatorSpec {
  Field F;
  FaceFields H;  // empty means h = 0
  PsiKind psi = PsiKind::zero;
  Field g;       // coefficient of the bounded psi
  std::function<double(double u, double g)> psi_custom;
  double r = 1.0;  // exponent of the uniform L^{r'} bound on psi(u)
  P1Constants p1;
};

/// F, psi and H all zero on `grid`.
BOperatorSpec make_zero_b(const Grid& grid);

/// Whether (a0, b) lies in the admissible range for exponent p: 0 < b < p_1 - 1
/// when a0 > 0, and 0 < b < p_1 / p' when a0 = 0.
Validation validate_p1_constants(const P1Constants& c, const ExponentVector& p);

/// Nodal psi(u) and its derivative in u.
Field psi_field(const BOperatorSpec& spec, const Field& u);
Field psi_derivative(const BOperatorSpec& spec, const Field& u);

double b_apply(const BOperatorSpec& spec, const Field& u, const Field& v);

/// Nodal B(u) with <B(u), v>_h = b_apply(spec, u, v) for every v.
Field b_dual_vector(const BOperatorSpec& spec, const Field& u);

/// Integrable datum sampled on the grid.
struct DatumSpec {
  Field f;
};

/// |x - x0|^{-alpha} (times amplitude) sampled at the nodes; the node nearest to
/// x0 holds the cell average over its cell instead of the point value.
Field singular_profile(const Grid& grid, std::span<const double> x0, double alpha, double amplitude = 1.0);

/// f / (1 + eps |f|) nodewise; eps = 0 returns f.
Field f_reg(const DatumSpec& datum, double epsilon);

struct P1Report {
  double fitted_C = 0.0;       // smallest C for which the bound holds on the cloud
  bool finite_fit = true;      // fitted_C < 1e6
  bool growth_in_u = false;    // ratio keeps growing with ||u||
  std::vector<double> amplitudes;
  std::vector<double> ratio_by_amplitude;  // worst ratio per amplitude bucket
  std::size_t pairs = 0;
};

/// Fits the constant in the (P1)-type growth bound over random (u, v) pairs on
/// `grid`; u amplitudes span 1e-2 .. 1e4.
P1Report check_P1(const BOperatorSpec& spec, const ExponentVector& p, std::size_t cloud_size, Rng& rng);

/// Smooth random field: sum of a few sine modes with random coefficients.
Field random_smooth_field(const Grid& grid, Rng& rng, int modes = 3);

}  // namespace anisolab
