#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "anisolab/checks.hpp"
#include "anisolab/exponents.hpp"
#include "anisolab/flux.hpp"

namespace anisolab {

using LowerOrderFunction = std::function<double(std::span<const double> x, double t, std::span<const double> xi)>;

enum class PhiKind {
  model,   // (sum_j |xi_j|^{p_j} + 1) |t|^{m-2} t
  zero,
  custom,  // user callable; solvable only after passing all three checks
};

/// Piecewise-linear g(t) with linear extrapolation; the table-driven custom
/// term is g(t) (sum_j |xi_j|^{p_j} + 1).
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> knots;  // sorted by abscissa
  double operator()(double t) const;
};

/// Gradient-dependent lower-order term together with the constants its checks use.
struct LowerOrderSpec {
  ExponentVector exponents;
  PhiKind kind = PhiKind::model;
  double m = 3.0;
  std::function<double(double)> zeta;  // nondecreasing growth modulus
  PointFunction c;                     // c(x) >= 0; empty means 1
  double gamma = 1.0;
  double tau = 1.0;
  LowerOrderFunction custom;
};

struct ModelConstants {
  std::function<double(double)> zeta;  // max(1, s)^{m-1}
  double c = 1.0;
  double gamma = 1.0;  // tau^{m-1}
};

ModelConstants model_constants(double m, double tau);

/// Model term with zeta, c and gamma filled from model_constants(m, tau).
LowerOrderSpec make_model_phi(const ExponentVector& p, double m, double tau = 1.0);
LowerOrderSpec make_zero_phi(const ExponentVector& p);
/// Custom term g(t) (sum_j |xi_j|^{p_j} + 1) from a table; zeta/gamma/tau must be set by the caller.
LowerOrderSpec make_table_phi(const ExponentVector& p, PiecewiseLinear g);

double phi_eval(const LowerOrderSpec& spec, std::span<const double> x, double t, std::span<const double> xi);

struct RegularizedLowerOrder {
  LowerOrderSpec base;
  double epsilon = 0.0;
};

/// Phi / (1 + eps |Phi|).
double phi_reg(const RegularizedLowerOrder& reg, std::span<const double> x, double t, std::span<const double> xi);
double regularize(double phi, double epsilon);

struct PhiPartials {
  double value = 0.0;
  double d_t = 0.0;
  std::vector<double> d_xi;
};

/// Value and partials of Phi (epsilon = 0) or Phi_eps. For m < 2 the t-derivative
/// is evaluated with |t| floored at `t_floor`. Custom terms use central differences.
PhiPartials phi_partials(const LowerOrderSpec& spec, std::span<const double> x, double t,
                         std::span<const double> xi, double epsilon, double t_floor);

/// Phi(x, t, xi) t >= 0.
CheckResult check_sign(const LowerOrderSpec& spec, std::size_t samples, Rng& rng);
/// |Phi| <= zeta(|t|) (sum_j |xi_j|^{p_j} + c(x)).
CheckResult check_growth_phi(const LowerOrderSpec& spec, std::size_t samples, Rng& rng);
/// |Phi| >= gamma sum_j |xi_j|^{p_j} for |t| >= tau.
CheckResult check_lower_bound(const LowerOrderSpec& spec, std::size_t samples, Rng& rng);
/// zeta nondecreasing on a uniform s-grid over [0, s_max].
CheckResult check_zeta_monotone(const LowerOrderSpec& spec, double s_max = 100.0, std::size_t points = 10001);

/// The spec may enter the solver: built-in kinds always, custom kinds only if
/// sign, growth and lower-bound checks pass on 1e5 samples.
bool admissible_for_solver(const LowerOrderSpec& spec, Rng& rng);

}  // namespace anisolab
