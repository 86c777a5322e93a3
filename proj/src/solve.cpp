#include "anisolab/solve.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace anisolab {

void validate_instance(const ProblemInstance& inst) {
  // The discrete problem needs 1 < p_1 <= ... <= p_N only; p < N is a modelling
  // condition enforced where configs are validated.
  const ExponentVector& p = inst.flux.exponents;
  if (p.dim() < 2 || p.dim() > 3) throw std::invalid_argument("flux exponents: N must be 2 or 3");
  for (int j = 0; j < p.dim(); ++j) {
    if (!std::isfinite(p[j]) || !(p[j] > 1.0)) throw std::invalid_argument("flux exponents: p_j > 1 fails");
    if (j > 0 && !(p[j - 1] <= p[j])) throw std::invalid_argument("flux exponents: p_j <= p_{j+1} fails");
  }
  if (inst.flux.exponents.dim() != inst.grid.dim())
    throw std::invalid_argument("instance: exponent dimension differs from grid dimension");
  if (!(inst.lower.exponents == inst.flux.exponents))
    throw std::invalid_argument("instance: flux and lower-order term use different exponent vectors");
  if (inst.flux.kind == FluxKind::custom)
    throw std::invalid_argument("instance: custom fluxes are check-only and cannot be solved");
  if (!(inst.b.F.grid() == inst.grid)) throw std::invalid_argument("instance: F lives on a different grid");
  if (inst.b.psi == PsiKind::bounded && !(inst.b.g.grid() == inst.grid))
    throw std::invalid_argument("instance: psi coefficient g lives on a different grid");
  for (const FaceField& hj : inst.b.H)
    if (!(hj.grid() == inst.grid)) throw std::invalid_argument("instance: H lives on a different grid");
  if (!inst.b.H.empty() && static_cast<int>(inst.b.H.size()) != inst.grid.dim())
    throw std::invalid_argument("instance: H needs one face field per axis");
  if (!(inst.datum.f.grid() == inst.grid)) throw std::invalid_argument("instance: datum lives on a different grid");
  if (!(inst.epsilon >= 0.0)) throw std::invalid_argument("instance: epsilon must be >= 0");
  if (inst.use_phi_reg && !(inst.epsilon > 0.0))
    throw std::invalid_argument("instance: regularized lower-order term needs epsilon > 0");
}

namespace {

// Node-averaged gradient components at node i.
void node_gradient(const Grid& g, const FaceFields& grad, std::size_t i, std::span<double> xi) {
  for (int j = 0; j < g.dim(); ++j) {
    const FaceField& gj = grad[static_cast<std::size_t>(j)];
    xi[static_cast<std::size_t>(j)] = 0.5 * (gj[g.face_left(i, j)] + gj[g.face_right(i, j)]);
  }
}

double value_or_zero(const Field& u, long node) { return node >= 0 ? u[static_cast<std::size_t>(node)] : 0.0; }

void require_finite(const Field& f, const char* term) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!std::isfinite(f[i]))
      throw std::runtime_error(std::string("non-finite value in ") + term + " at node " + std::to_string(i));
}

void require_finite(const FaceFields& ff, const char* term) {
  for (const FaceField& f : ff)
    for (std::size_t i = 0; i < f.size(); ++i)
      if (!std::isfinite(f[i]))
        throw std::runtime_error(std::string("non-finite value in ") + term + " on axis " +
                                 std::to_string(f.axis()) + " face " + std::to_string(i));
}

double lower_epsilon(const ProblemInstance& inst) { return inst.use_phi_reg ? inst.epsilon : 0.0; }

}  // namespace

Field lower_order_field(const ProblemInstance& inst, const Field& u) {
  const Grid& g = inst.grid;
  const FaceFields grad = gradient(u);
  Field out(g);
  if (inst.lower.kind == PhiKind::zero) return out;
  const double eps = lower_epsilon(inst);
  std::vector<double> xi(static_cast<std::size_t>(g.dim()));
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    node_gradient(g, grad, i, xi);
    const auto x = g.node_coord(i);
    const std::span<const double> xs(x.data(), xi.size());
    const double phi = phi_eval(inst.lower, xs, u[i], xi);
    out[i] = eps > 0.0 ? regularize(phi, eps) : phi;
  }
  return out;
}

Field datum_field(const ProblemInstance& inst) { return f_reg(inst.datum, inst.epsilon); }

ResidualParts residual_parts(const ProblemInstance& inst, const Field& u, double delta) {
  const Grid& g = inst.grid;
  if (!(u.grid() == g)) throw std::invalid_argument("residual: field lives on a different grid");
  ResidualParts parts;
  parts.flux.reserve(static_cast<std::size_t>(g.dim()));
  for (int j = 0; j < g.dim(); ++j) {
    FaceField a = forward_diff(u, j);
    for (std::size_t f = 0; f < a.size(); ++f) {
      const auto nodes = g.face_nodes(f, j);
      const double t = 0.5 * (value_or_zero(u, nodes[0]) + value_or_zero(u, nodes[1]));
      a[f] = flux_component(inst.flux, j, t, a[f], delta).value;
    }
    parts.flux.push_back(std::move(a));
  }
  parts.lower = lower_order_field(inst, u);
  parts.b = b_dual_vector(inst.b, u);
  parts.f = datum_field(inst);
  require_finite(parts.flux, "flux term A(u, grad u)");
  require_finite(parts.lower, "lower-order term Phi");
  require_finite(parts.b, "operator term B(u)");
  require_finite(parts.f, "datum f_eps");
  return parts;
}

Field residual(const ProblemInstance& inst, const Field& u, double delta) {
  ResidualParts parts = residual_parts(inst, u, delta);
  Field r = divergence_adjoint(parts.flux);
  r += parts.lower;
  r -= parts.b;
  r -= parts.f;
  return r;
}

Eigen::SparseMatrix<double> jacobian(const ProblemInstance& inst, const Field& u, double delta, double t_floor) {
  const Grid& g = inst.grid;
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.num_nodes() * static_cast<std::size_t>(6 * g.dim() + 2));

  for (int j = 0; j < g.dim(); ++j) {
    const double inv_h = 1.0 / g.h(j);
    for (std::size_t f = 0; f < g.num_faces(j); ++f) {
      const auto nodes = g.face_nodes(f, j);
      const double ul = value_or_zero(u, nodes[0]);
      const double ur = value_or_zero(u, nodes[1]);
      const FluxComponent c = flux_component(inst.flux, j, 0.5 * (ul + ur), (ur - ul) * inv_h, delta);
      const double d_right = c.d_xi * inv_h + 0.5 * c.d_t;
      const double d_left = -c.d_xi * inv_h + 0.5 * c.d_t;
      // Face f is the left face of node r and the right face of node l.
      for (int side = 0; side < 2; ++side) {
        const long row = nodes[static_cast<std::size_t>(side)];
        if (row < 0) continue;
        const double sign = side == 1 ? inv_h : -inv_h;
        if (nodes[1] >= 0) trip.emplace_back(row, nodes[1], sign * d_right);
        if (nodes[0] >= 0) trip.emplace_back(row, nodes[0], sign * d_left);
      }
    }
  }

  if (inst.lower.kind != PhiKind::zero) {
    const FaceFields grad = gradient(u);
    const double eps = lower_epsilon(inst);
    std::vector<double> xi(static_cast<std::size_t>(g.dim()));
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      node_gradient(g, grad, i, xi);
      const auto x = g.node_coord(i);
      const PhiPartials pp =
          phi_partials(inst.lower, std::span<const double>(x.data(), xi.size()), u[i], xi, eps, t_floor);
      trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), pp.d_t);
      const auto idx = g.node_index(i);
      for (int j = 0; j < g.dim(); ++j) {
        const double w = pp.d_xi[static_cast<std::size_t>(j)] / (2.0 * g.h(j));
        if (idx[static_cast<std::size_t>(j)] + 1 < g.n())
          trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + g.stride(j)), w);
        if (idx[static_cast<std::size_t>(j)] > 0)
          trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - g.stride(j)), -w);
      }
    }
  }

  if (inst.b.psi != PsiKind::zero) {
    const Field dpsi = psi_derivative(inst.b, u);
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), -dpsi[i]);
  }

  Eigen::SparseMatrix<double> jac(n, n);
  jac.setFromTriplets(trip.begin(), trip.end());
  return jac;
}

Eigen::SparseMatrix<double> jacobian_fd(const ProblemInstance& inst, const Field& u, double delta, double step) {
  const Grid& g = inst.grid;
  const int colors = 2 * g.dim() + 1;
  const Field r0 = residual(inst, u, delta);
  std::vector<Eigen::Triplet<double>> trip;
  // (i + 2j + 3k) mod (2N+1) separates every pair of nodes whose stencils overlap.
  auto color_of = [&](std::size_t node) {
    const auto idx = g.node_index(node);
    return (idx[0] + 2 * idx[1] + 3 * idx[2]) % colors;
  };
  for (int c = 0; c < colors; ++c) {
    Field up = u;
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      if (color_of(i) == c) up[i] += step * (1.0 + std::abs(u[i]));
    const Field r1 = residual(inst, up, delta);
    for (std::size_t k = 0; k < g.num_nodes(); ++k) {
      if (color_of(k) != c) continue;
      const double hk = up[k] - u[k];
      const auto idx = g.node_index(k);
      auto add_row = [&](std::size_t row) {
        trip.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k), (r1[row] - r0[row]) / hk);
      };
      add_row(k);
      for (int j = 0; j < g.dim(); ++j) {
        if (idx[static_cast<std::size_t>(j)] + 1 < g.n()) add_row(k + g.stride(j));
        if (idx[static_cast<std::size_t>(j)] > 0) add_row(k - g.stride(j));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::SparseMatrix<double> jac(n, n);
  jac.setFromTriplets(trip.begin(), trip.end());
  return jac;
}

DualNorm::DualNorm(const Grid& grid, const ExponentVector& p, std::uint64_t seed) : grid_(grid) {
  if (p.dim() != grid.dim()) throw std::invalid_argument("dual_norm: exponent/grid dimension mismatch");
  // A nodal hat has two faces of height 1/h per axis.
  double hat_norm = 0.0;
  for (int j = 0; j < p.dim(); ++j)
    hat_norm += std::pow(2.0 * grid.cell_volume() * std::pow(grid.h(j), -p[j]), 1.0 / p[j]);
  hat_scale_ = grid.cell_volume() / hat_norm;
  Rng rng(seed);
  for (int k = 0; k < 10; ++k) {
    probes_.push_back(random_smooth_field(grid, rng));
    probe_norms_.push_back(anisotropic_norm(probes_.back(), p));
  }
}

double DualNorm::operator()(const Field& w) const {
  if (!(w.grid() == grid_)) throw std::invalid_argument("dual_norm: grid mismatch");
  double best = hat_scale_ * w.max_abs();
  for (std::size_t k = 0; k < probes_.size(); ++k)
    if (probe_norms_[k] > 0.0) best = std::max(best, std::abs(inner(w, probes_[k])) / probe_norms_[k]);
  return best;
}

double dual_norm(const Field& w, const ExponentVector& p, std::uint64_t seed) { return DualNorm(w.grid(), p, seed)(w); }

namespace {

double merit_of(const Field& r) { return 0.5 * inner(r, r); }

Field solve_linear(const Eigen::SparseMatrix<double>& a, const Field& rhs, bool& ok) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  Field out(rhs.grid());
  if (lu.info() != Eigen::Success) {
    ok = false;
    return out;
  }
  Eigen::Map<const Eigen::VectorXd> b(rhs.values().data(), static_cast<Eigen::Index>(rhs.size()));
  Eigen::VectorXd x = lu.solve(b);
  ok = lu.info() == Eigen::Success && x.allFinite();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[static_cast<Eigen::Index>(i)];
  return out;
}

// Frozen-coefficient linearisation: -div(a(u_old) grad w) + kappa(u_old) w.
Eigen::SparseMatrix<double> picard_operator(const ProblemInstance& inst, const Field& u, double delta) {
  const Grid& g = inst.grid;
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const double floor = std::max(delta, 1e-12);
  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 0; j < g.dim(); ++j) {
    const double inv_h = 1.0 / g.h(j);
    for (std::size_t f = 0; f < g.num_faces(j); ++f) {
      const auto nodes = g.face_nodes(f, j);
      const double ul = value_or_zero(u, nodes[0]);
      const double ur = value_or_zero(u, nodes[1]);
      const double slope = (ur - ul) * inv_h;
      const FluxComponent c = flux_component(inst.flux, j, 0.5 * (ul + ur), slope, floor);
      const double a = std::abs(slope) > 0.0 ? c.value / slope : c.d_xi;
      const double w = a * inv_h * inv_h;
      if (nodes[0] >= 0) trip.emplace_back(nodes[0], nodes[0], w);
      if (nodes[1] >= 0) trip.emplace_back(nodes[1], nodes[1], w);
      if (nodes[0] >= 0 && nodes[1] >= 0) {
        trip.emplace_back(nodes[0], nodes[1], -w);
        trip.emplace_back(nodes[1], nodes[0], -w);
      }
    }
  }
  const Field phi = lower_order_field(inst, u);
  const FaceFields grad = gradient(u);
  std::vector<double> xi(static_cast<std::size_t>(g.dim()));
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    double kappa = 0.0;
    if (std::abs(u[i]) > floor) {
      kappa = phi[i] / u[i];
    } else if (inst.lower.kind != PhiKind::zero) {
      node_gradient(g, grad, i, xi);
      const auto x = g.node_coord(i);
      kappa = phi_partials(inst.lower, std::span<const double>(x.data(), xi.size()), u[i], xi,
                           lower_epsilon(inst), floor)
                  .d_t;
    }
    trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), std::max(kappa, 0.0));
  }
  Eigen::SparseMatrix<double> op(n, n);
  op.setFromTriplets(trip.begin(), trip.end());
  return op;
}

struct LevelOutcome {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Drives residual(inst, ., residual_delta) to tol from u. The Jacobian uses
// jacobian_delta (equal to residual_delta except in the final unsmoothed pass).
LevelOutcome newton_level(const ProblemInstance& inst, Field& u, double residual_delta, double jacobian_delta,
                          double target, const SolverOptions& opts, const DualNorm& dual, SolveReport& rep) {
  LevelOutcome out;
  Field r = residual(inst, u, residual_delta);
  double merit = merit_of(r);
  double res = dual(r);
  int stalls = 0;
  int picard_left = 0;
  while (res > target && out.iterations < opts.max_iter) {
    const bool picard = picard_left > 0;
    Field direction(inst.grid);
    bool ok = true;
    if (picard) {
      // w solves the frozen-coefficient problem with the current data; step u -> w.
      Field rhs = r;
      rhs *= -1.0;
      const Field target = solve_linear(picard_operator(inst, u, jacobian_delta), rhs, ok);
      direction = target;
      --picard_left;
      rep.picard_used = true;
    } else {
      Field rhs = r;
      rhs *= -1.0;
      const auto jac = opts.jacobian == JacobianMode::analytic ? jacobian(inst, u, jacobian_delta)
                                                                : jacobian_fd(inst, u, jacobian_delta);
      direction = solve_linear(jac, rhs, ok);
    }
    ++out.iterations;
    ++rep.iterations;
    IterationRecord rec;
    rec.delta = residual_delta;
    rec.iteration = rep.iterations;
    rec.kind = picard ? "picard" : "newton";
    rec.merit_before = merit;
    bool accepted = false;
    if (ok) {
      for (double alpha = 1.0; alpha >= opts.min_step; alpha *= 0.5) {
        Field trial = u;
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += alpha * direction[i];
        Field rt;
        try {
          rt = residual(inst, trial, residual_delta);
        } catch (const std::runtime_error&) {
          continue;  // trial left the finite range; shorten the step
        }
        const double mt = merit_of(rt);
        const bool decrease = picard ? mt < merit : mt <= (1.0 - 2.0 * opts.armijo * alpha) * merit;
        if (decrease) {
          u = std::move(trial);
          r = std::move(rt);
          merit = mt;
          rec.step = alpha;
          accepted = true;
          break;
        }
      }
    }
    res = dual(r);
    rec.merit_after = merit;
    rec.residual = res;
    rec.accepted = accepted;
    rep.history.push_back(rec);
    if (accepted) {
      stalls = 0;
    } else if (res <= opts.tol) {
      break;  // below tol and no further decrease available
    } else if (!picard && ++stalls >= opts.stall_limit) {
      picard_left = opts.picard_steps;
      stalls = 0;
    } else if (picard && !accepted) {
      picard_left = 0;
      if (++stalls >= 2 * opts.stall_limit) break;
    }
  }
  out.residual = res;
  out.converged = res <= opts.tol;
  return out;
}

}  // namespace

std::pair<Field, SolveReport> solve_regularized(const ProblemInstance& inst, Field u0, const SolverOptions& opts) {
  validate_instance(inst);
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_regularized: tol must be positive");
  if (!(u0.grid() == inst.grid)) throw std::invalid_argument("solve_regularized: initial guess on a different grid");
  if (inst.lower.kind == PhiKind::custom) {
    Rng rng(kDualNormSeed);
    if (!admissible_for_solver(inst.lower, rng))
      throw std::invalid_argument("solve_regularized: custom lower-order term fails the sign/growth/lower-bound checks");
  }
  const DualNorm dual(inst.grid, inst.flux.exponents);
  SolveReport rep;
  Field u = std::move(u0);

  if (opts.delta_continuation) {
    double delta = opts.delta0 > 0.0 ? opts.delta0 : inst.grid.h();
    for (;;) {
      const LevelOutcome lv = newton_level(inst, u, delta, delta, opts.tol, opts, dual, rep);
      rep.delta_ladder.push_back({delta, lv.iterations, lv.residual, lv.converged});
      if (delta <= opts.delta_min) break;
      delta = std::max(delta * opts.delta_factor, opts.delta_min);
    }
  }
  // The unsmoothed pass aims two decades below tol; converged still means <= tol.
  const LevelOutcome fin = newton_level(inst, u, 0.0, opts.final_jacobian_delta, 0.01 * opts.tol, opts, dual, rep);
  rep.delta_ladder.push_back({0.0, fin.iterations, fin.residual, fin.converged});
  rep.residual = dual(residual(inst, u, 0.0));
  rep.converged = rep.residual <= opts.tol;
  return {std::move(u), std::move(rep)};
}

void write_solve_report_csv(std::ostream& os, const SolveReport& rep) {
  os << "iteration,delta,kind,step,merit_before,merit_after,residual,accepted\n";
  char buf[256];
  for (const IterationRecord& r : rep.history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%d\n", r.iteration, r.delta, r.kind.c_str(),
                  r.step, r.merit_before, r.merit_after, r.residual, r.accepted ? 1 : 0);
    os << buf;
  }
}

}  // namespace anisolab
