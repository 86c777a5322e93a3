#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "anisolab/flux.hpp"
#include "anisolab/grid.hpp"
#include "anisolab/lower_order.hpp"
#include "anisolab/source.hpp"

namespace anisolab {

/// Discrete problem  A_h u + Phi_h(u) - B_h(u) - f_eps = 0  for one epsilon.
///
/// With use_phi_reg the lower-order term is Phi_eps = Phi / (1 + eps |Phi|)
/// (homogeneous path); otherwise the full Phi is used and eps only enters
/// through f_eps = f / (1 + eps |f|).
struct ProblemInstance {
  Grid grid;
  FluxSpec flux;
  LowerOrderSpec lower;
  BOperatorSpec b;
  DatumSpec datum;
  double epsilon = 0.1;
  bool use_phi_reg = true;
};

/// Throws std::invalid_argument when grids or exponent vectors disagree, or the
/// flux kind is check-only.
void validate_instance(const ProblemInstance& inst);

/// Terms of the residual; residual = div_adjoint(flux) + lower - b - f.
struct ResidualParts {
  FaceFields flux;  // A_j(t_face, d_j u) on faces
  Field lower;      // Phi or Phi_eps at nodes, gradients averaged face-to-node
  Field b;          // B(u)
  Field f;          // f_eps
};

/// Face-averaged t and node-averaged gradients feed the flux and Phi;
/// `delta` > 0 selects the smoothed flux.
ResidualParts residual_parts(const ProblemInstance& inst, const Field& u, double delta = 0.0);
Field residual(const ProblemInstance& inst, const Field& u, double delta = 0.0);

/// Nodal lower-order field (Phi_eps or Phi according to the instance).
Field lower_order_field(const ProblemInstance& inst, const Field& u);
/// f_eps of the instance.
Field datum_field(const ProblemInstance& inst);

/// Exact derivative of residual(inst, ., delta) at u. Singular factors of Phi in t
/// (m < 2) use |t| floored at t_floor.
Eigen::SparseMatrix<double> jacobian(const ProblemInstance& inst, const Field& u, double delta, double t_floor = 1e-8);

/// Forward-difference Jacobian using a stencil colouring ((2N+1) residual calls).
Eigen::SparseMatrix<double> jacobian_fd(const ProblemInstance& inst, const Field& u, double delta,
                                        double step = 1e-7);

inline constexpr std::uint64_t kDualNormSeed = 0x5eed5eedULL;

/// Discrete dual norm: sup of <w, v>_h / ||v||_{W,h} over nodal hats and ten
/// seeded random smooth fields.
class DualNorm {
 public:
  DualNorm(const Grid& grid, const ExponentVector& p, std::uint64_t seed = kDualNormSeed);
  double operator()(const Field& w) const;

 private:
  Grid grid_;
  double hat_scale_ = 0.0;  // h^N / ||hat||_{W,h}
  std::vector<Field> probes_;
  std::vector<double> probe_norms_;
};

double dual_norm(const Field& w, const ExponentVector& p, std::uint64_t seed = kDualNormSeed);

enum class JacobianMode { analytic, finite_difference };

struct SolverOptions {
  double tol = 1e-8;            // dual-norm tolerance
  int max_iter = 200;           // per delta level
  double delta0 = 0.0;          // 0 selects h
  double delta_min = 1e-6;
  double delta_factor = 0.1;
  bool delta_continuation = true;
  double final_jacobian_delta = 1e-12;  // Jacobian smoothing in the unsmoothed pass
  int stall_limit = 3;          // consecutive failed Newton line searches before Picard
  int picard_steps = 20;
  double armijo = 1e-4;
  double min_step = 1.0 / 1048576.0;
  JacobianMode jacobian = JacobianMode::analytic;
  bool operator==(const SolverOptions&) const = default;
};

struct IterationRecord {
  double delta = 0.0;
  int iteration = 0;
  std::string kind;  // "newton" or "picard"
  double step = 0.0;
  double merit_before = 0.0;
  double merit_after = 0.0;
  double residual = 0.0;  // dual norm after the step
  bool accepted = false;
};

struct DeltaLevel {
  double delta = 0.0;  // 0 marks the final pass on the unsmoothed residual
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // dual norm of the unsmoothed residual
  bool converged = false;
  bool picard_used = false;
  std::vector<IterationRecord> history;
  std::vector<DeltaLevel> delta_ladder;
};

/// Damped Newton on the delta-smoothed residual, delta = h, h/10, ... down to
/// delta_min, then a final pass on the unsmoothed residual whose Jacobian is
/// smoothed with final_jacobian_delta. Armijo backtracking
/// on 0.5 <R, R>_h; damped Picard (frozen coefficients) after stall_limit
/// consecutive failed line searches. Never throws on non-convergence.
std::pair<Field, SolveReport> solve_regularized(const ProblemInstance& inst, Field u0,
                                                const SolverOptions& opts = {});

void write_solve_report_csv(std::ostream& os, const SolveReport& rep);

}  // namespace anisolab
