#pragma once

#include <functional>
#include <span>
#include <vector>

#include "anisolab/checks.hpp"
#include "anisolab/exponents.hpp"

namespace anisolab {

using PointFunction = std::function<double(std::span<const double> x)>;
using FluxFunction =
    std::function<void(std::span<const double> x, double t, std::span<const double> xi, std::span<double> out)>;

enum class FluxKind {
  prototype,  // scale * |xi_j|^{p_j-2} xi_j
  coupled,    // prototype times (1 + coupling * t^2 / (1 + t^2))
  custom,     // user callable; assumption checks only, never solved
};

/// Leray-Lions flux A(x, t, xi) together with its structural constants.
struct FluxSpec {
  ExponentVector exponents;
  FluxKind kind = FluxKind::prototype;
  double nu0 = 1.0;              // coercivity constant
  double nu = 1.0;               // growth constant
  std::vector<PointFunction> eta;  // eta_j(x) >= 0; empty means identically zero
  double scale = 1.0;
  double coupling = 0.0;
  FluxFunction custom;
};

/// (xi_j^2 + delta^2)^{(p_j-2)/2} xi_j in place of |xi_j|^{p_j-2} xi_j.
struct SmoothedFluxSpec {
  FluxSpec base;
  double delta = 0.0;
};

/// Structural constants that make `spec` satisfy coercivity and growth:
/// nu0 = scale, nu = scale * (1 + coupling).
FluxSpec make_prototype_flux(const ExponentVector& p, double scale = 1.0, double coupling = 0.0);

std::vector<double> flux_eval(const FluxSpec& spec, std::span<const double> x, double t, std::span<const double> xi);
std::vector<double> flux_eval_smoothed(const SmoothedFluxSpec& spec, std::span<const double> x, double t,
                                       std::span<const double> xi);

struct FluxComponent {
  double value = 0.0;
  double d_xi = 0.0;  // derivative in xi_j
  double d_t = 0.0;   // derivative in t
};

/// Component j of a non-custom flux and its partial derivatives. With delta = 0 the
/// xi-derivative is (p_j - 1)|xi_j|^{p_j-2}, infinite at xi_j = 0 when p_j < 2.
FluxComponent flux_component(const FluxSpec& spec, int j, double t, double xi_j, double delta = 0.0);

FluxFunction as_function(const FluxSpec& spec);
FluxFunction as_function(const SmoothedFluxSpec& spec);

/// inf of sum_j A_j xi_j / sum_j |xi_j|^{p_j} over a random (x, t, xi) cloud.
/// Passes when the infimum is positive and not below `nu0`.
CheckResult check_coercivity(const FluxFunction& flux, const ExponentVector& p, double nu0, std::size_t samples,
                             Rng& rng);
CheckResult check_coercivity(const FluxSpec& spec, std::size_t samples, Rng& rng);
CheckResult check_coercivity(const SmoothedFluxSpec& spec, std::size_t samples, Rng& rng);

/// sum_j (A_j(xi) - A_j(xihat)) (xi_j - xihat_j) >= 0, strictly when xi != xihat.
CheckResult check_monotonicity(const FluxFunction& flux, const ExponentVector& p, std::size_t pairs, Rng& rng);
CheckResult check_monotonicity(const FluxSpec& spec, std::size_t pairs, Rng& rng);

/// |A_j| <= nu [eta_j(x) + |t|^{p*/p_j'} + (sum_l |xi_l|^{p_l})^{1/p_j'}] on a random cloud.
/// The |t| term is omitted when the harmonic mean reaches N.
CheckResult check_growth(const FluxSpec& spec, std::size_t samples, Rng& rng);

}  // namespace anisolab
