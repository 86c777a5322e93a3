#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "anisolab/solve.hpp"

namespace anisolab {

/// Nodewise T_k(u) = clamp(u, -k, k) and G_k(u) = u - T_k(u). Both throw for k <= 0.
Field truncate(const Field& u, double k);
Field tail(const Field& u, double k);
double truncate(double t, double k);
double tail(double t, double k);

/// Difference quotients of the nodal truncation: faces with both endpoints
/// inside the band keep d_j u, faces with both endpoints clipped to the same
/// side carry 0.
FaceFields truncated_gradient(const Field& u, double k);

/// Integral of sum_j [A_j(u_eps, d T_k u_eps) - A_j(u_eps, d T_k U)] d_j(T_k u_eps - T_k U)
/// over the faces; t is the face average of u_eps. Throws std::runtime_error when
/// the integral is negative beyond a 1e-12 relative slack.
double defect(const Field& u_eps, const Field& U, double k, const FluxSpec& flux);

double phi_lambda(double t, double lambda);
double phi_lambda_derivative(double t, double lambda);
/// 1.25 zeta(k)^2 / (4 nu0^2).
double lambda_for(double k, double nu0, const std::function<double(double)>& zeta);
double lambda_for_value(double zeta_k, double nu0);

/// phi_lambda'(t) - (zeta_k / nu0) |phi_lambda(t)| - 1/2, evaluated as
/// exp(lambda t^2) q(t) - 1/2 with q(t) = 1 + 2 lambda t^2 - (zeta_k/nu0)|t|.
/// Returns +inf when the exponential overflows and q(t) > 0.
double bea_margin(double t, double lambda, double zeta_k, double nu0);

struct BeaScan {
  double min_margin = 0.0;
  double argmin = 0.0;
  std::size_t points = 0;
};
/// Uniform scan of bea_margin over [-t_max, t_max].
BeaScan bea_scan(double lambda, double zeta_k, double nu0, double t_max = 50.0, std::size_t points = 1000000);

struct EnergyTerms {
  double flux = 0.0;   // sum_j <A_j(U, d U), d_j U>_h
  double lower = 0.0;  // <Phi(U), U>_h
  double b = 0.0;      // b_apply(U, U)
  double f = 0.0;      // <f_eps, U>_h
  double residual = 0.0;  // |flux + lower - b - f|
};
EnergyTerms energy_terms(const Field& U, const ProblemInstance& inst);
double energy_residual(const Field& U, const ProblemInstance& inst);

struct TailCheck {
  double lhs = 0.0;        // ||G_k u_eps||_{W,h}
  double rhs = 0.0;        // energy bound plus residual allowance
  double allowance = 0.0;  // part of rhs due to the solver residual
  double margin = 0.0;     // rhs - lhs
};
/// rhs = sum_j (max(0, b_apply(U, G_k U) + <f_eps, G_k U>) / nu0)^{1/p_j}
///     + sum_j (|<R(u_eps), G_k u_eps>| / nu0)^{1/p_j}.
TailCheck gk_tail_check(const Field& u_eps, const Field& U, double k, const ProblemInstance& inst);

struct IntegrabilityScan {
  double total = 0.0;                // integral of |Phi(U)|
  std::vector<double> levels;        // M values
  std::vector<double> tail_mass;     // integral of |Phi(U)| over {|U| > M}
  std::vector<double> fractions;     // measure fractions omega
  std::vector<double> set_mass;      // integral of |Phi(U)| over the greedy set of that measure
};
/// The greedy set for fraction w holds the ceil(w * nodes) nodes with largest |Phi(U)|.
IntegrabilityScan uniform_integrability_scan(const Field& U, const ProblemInstance& inst,
                                             const std::vector<double>& levels,
                                             const std::vector<double>& fractions);

enum class LadderMode { homogeneous, l1_data };

struct LadderConfig {
  double eps0 = 0.5;
  double rho = 0.5;
  int max_levels = 12;
  double stop_tol = 1e-6;
  std::vector<double> k_list{1.0, 2.0, 4.0};
  LadderMode mode = LadderMode::homogeneous;
  bool diagnostic_only = false;
  std::vector<double> ui_levels{2.0, 4.0, 8.0, 16.0};
  std::vector<double> ui_fractions{1.0, 0.1, 0.01};
  bool operator==(const LadderConfig&) const = default;
};

/// Throws std::invalid_argument unless 0 < rho < 1, eps0 > 0, max_levels >= 1
/// and k_list is nonempty, positive and strictly increasing.
void validate_ladder_config(const LadderConfig& cfg);

struct TruncationDiagnostics {
  double k = 0.0;
  double distance = 0.0;  // ||T_k u_eps - T_k U||_{W,h}
  double defect = 0.0;
  TailCheck tail;
};

struct LevelRecord {
  int level = 0;
  double epsilon = 0.0;
  double w_norm = 0.0;
  double phi_integral = 0.0;  // <Phi_eps(u), u>_h (homogeneous) or integral of |Phi(U)| (l1 data)
  std::optional<double> increment;  // ||u_l - u_{l-1}||_{W,h}
  double energy_residual = 0.0;
  int iterations = 0;
  double solve_residual = 0.0;
  bool converged = false;
  std::vector<IterationRecord> history;  // every step of the level's solve
  std::vector<TruncationDiagnostics> truncation;
};

struct LadderAssertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct LadderReport {
  LadderConfig config;
  std::vector<LevelRecord> levels;
  std::vector<Field> fields;  // solution at every level
  Field U;                    // final level
  bool complete = false;      // every level converged
  std::optional<IntegrabilityScan> integrability;  // l1-data mode only
  std::vector<LadderAssertion> assertions;
  /// All assertions hold and every level converged.
  bool passed() const;
};

/// Solves eps_l = eps0 rho^l with warm starts until the increment drops below
/// stop_tol (never before four levels) or max_levels is reached, then evaluates
/// every diagnostic against U.
LadderReport run_ladder(const LadderConfig& cfg, const ProblemInstance& tmpl, const SolverOptions& opts = {});

/// One row per level.
void write_ladder_report_csv(std::ostream& os, const LadderReport& rep);
/// name,passed,detail rows.
void write_ladder_assertions_csv(std::ostream& os, const LadderReport& rep);
/// kind,parameter,mass rows (kind = tail or fraction).
void write_integrability_csv(std::ostream& os, const IntegrabilityScan& scan);

}  // namespace anisolab
