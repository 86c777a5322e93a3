#include "anisolab/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace anisolab {

namespace {

void require_height(double k) {
  if (!(k > 0.0)) throw std::invalid_argument("truncation height k must be > 0");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

double truncate(double t, double k) {
  require_height(k);
  return std::clamp(t, -k, k);
}

double tail(double t, double k) { return t - truncate(t, k); }

Field truncate(const Field& u, double k) {
  require_height(k);
  Field out = u;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(u[i], -k, k);
  return out;
}

Field tail(const Field& u, double k) {
  Field out = u;
  out -= truncate(u, k);
  return out;
}

FaceFields truncated_gradient(const Field& u, double k) { return gradient(truncate(u, k)); }

double defect(const Field& u_eps, const Field& U, double k, const FluxSpec& flux) {
  const Grid& g = u_eps.grid();
  if (!(U.grid() == g)) throw std::invalid_argument("defect: fields live on different grids");
  const FaceFields ga = truncated_gradient(u_eps, k);
  const FaceFields gb = truncated_gradient(U, k);
  double sum = 0.0;
  double scale = 0.0;
  for (int j = 0; j < g.dim(); ++j) {
    const auto& a = ga[static_cast<std::size_t>(j)];
    const auto& b = gb[static_cast<std::size_t>(j)];
    for (std::size_t f = 0; f < a.size(); ++f) {
      const auto nodes = g.face_nodes(f, j);
      const double ul = nodes[0] >= 0 ? u_eps[static_cast<std::size_t>(nodes[0])] : 0.0;
      const double ur = nodes[1] >= 0 ? u_eps[static_cast<std::size_t>(nodes[1])] : 0.0;
      const double t = 0.5 * (ul + ur);
      const double term =
          (flux_component(flux, j, t, a[f]).value - flux_component(flux, j, t, b[f]).value) * (a[f] - b[f]);
      sum += term;
      scale += std::abs(term);
    }
  }
  sum *= g.cell_volume();
  scale *= g.cell_volume();
  if (sum < -1e-12 * (1.0 + scale))
    throw std::runtime_error("defect: negative integral " + fmt(sum) + "; the flux is not monotone");
  return std::max(sum, 0.0);
}

double phi_lambda(double t, double lambda) { return t * std::exp(lambda * t * t); }

double phi_lambda_derivative(double t, double lambda) {
  return std::exp(lambda * t * t) * (1.0 + 2.0 * lambda * t * t);
}

double lambda_for_value(double zeta_k, double nu0) {
  if (!(nu0 > 0.0)) throw std::invalid_argument("lambda_for: nu0 must be > 0");
  return 1.25 * zeta_k * zeta_k / (4.0 * nu0 * nu0);
}

double lambda_for(double k, double nu0, const std::function<double(double)>& zeta) {
  return lambda_for_value(zeta(k), nu0);
}

double bea_margin(double t, double lambda, double zeta_k, double nu0) {
  const double q = 1.0 + 2.0 * lambda * t * t - (zeta_k / nu0) * std::abs(t);
  const double e = std::exp(lambda * t * t);
  if (!std::isfinite(e)) return q > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  return e * q - 0.5;
}

BeaScan bea_scan(double lambda, double zeta_k, double nu0, double t_max, std::size_t points) {
  if (points < 2) throw std::invalid_argument("bea_scan: need at least two points");
  BeaScan out{std::numeric_limits<double>::infinity(), 0.0, points};
  for (std::size_t i = 0; i < points; ++i) {
    const double t = -t_max + 2.0 * t_max * static_cast<double>(i) / static_cast<double>(points - 1);
    const double m = bea_margin(t, lambda, zeta_k, nu0);
    if (m < out.min_margin) {
      out.min_margin = m;
      out.argmin = t;
    }
  }
  return out;
}

EnergyTerms energy_terms(const Field& U, const ProblemInstance& inst) {
  const ResidualParts parts = residual_parts(inst, U);
  EnergyTerms e;
  for (const FaceField& a : parts.flux) e.flux += inner(a, forward_diff(U, a.axis()));
  e.lower = inner(parts.lower, U);
  e.b = inner(parts.b, U);
  e.f = inner(parts.f, U);
  e.residual = std::abs(e.flux + e.lower - e.b - e.f);
  return e;
}

double energy_residual(const Field& U, const ProblemInstance& inst) { return energy_terms(U, inst).residual; }

TailCheck gk_tail_check(const Field& u_eps, const Field& U, double k, const ProblemInstance& inst) {
  const ExponentVector& p = inst.flux.exponents;
  const double nu0 = inst.flux.nu0;
  const Field gu = tail(u_eps, k);
  const Field gU = tail(U, k);
  TailCheck out;
  out.lhs = anisotropic_norm(gu, p);
  const double energy = std::max(0.0, b_apply(inst.b, U, gU) + inner(datum_field(inst), gU));
  const double slack = std::abs(inner(residual(inst, u_eps), gu));
  for (int j = 0; j < p.dim(); ++j) {
    out.rhs += std::pow(energy / nu0, 1.0 / p[j]);
    out.allowance += std::pow(slack / nu0, 1.0 / p[j]);
  }
  out.rhs += out.allowance;
  out.margin = out.rhs - out.lhs;
  return out;
}

IntegrabilityScan uniform_integrability_scan(const Field& U, const ProblemInstance& inst,
                                             const std::vector<double>& levels,
                                             const std::vector<double>& fractions) {
  const Field phi = lower_order_field(inst, U);
  const double vol = U.grid().cell_volume();
  IntegrabilityScan out;
  out.levels = levels;
  out.fractions = fractions;
  std::vector<double> mag(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) mag[i] = std::abs(phi[i]);
  out.total = vol * std::accumulate(mag.begin(), mag.end(), 0.0);
  for (double M : levels) {
    double s = 0.0;
    for (std::size_t i = 0; i < U.size(); ++i)
      if (std::abs(U[i]) > M) s += mag[i];
    out.tail_mass.push_back(vol * s);
  }
  std::vector<double> sorted = mag;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (double w : fractions) {
    if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("uniform_integrability_scan: fractions must lie in (0, 1]");
    const auto count = std::min(sorted.size(), static_cast<std::size_t>(std::ceil(w * static_cast<double>(sorted.size()) - 1e-9)));
    out.set_mass.push_back(vol * std::accumulate(sorted.begin(), sorted.begin() + static_cast<long>(count), 0.0));
  }
  return out;
}

void validate_ladder_config(const LadderConfig& cfg) {
  if (!(cfg.eps0 > 0.0)) throw std::invalid_argument("ladder: eps0 must be > 0");
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) throw std::invalid_argument("ladder: rho must lie in (0, 1)");
  if (cfg.max_levels < 1) throw std::invalid_argument("ladder: levels must be >= 1");
  if (!(cfg.stop_tol >= 0.0)) throw std::invalid_argument("ladder: stop_tol must be >= 0");
  if (cfg.k_list.empty()) throw std::invalid_argument("ladder: k_list must be nonempty");
  for (std::size_t i = 0; i < cfg.k_list.size(); ++i) {
    if (!(cfg.k_list[i] > 0.0)) throw std::invalid_argument("ladder: k_list entries must be > 0");
    if (i > 0 && !(cfg.k_list[i] > cfg.k_list[i - 1])) throw std::invalid_argument("ladder: k_list must be increasing");
  }
}

bool LadderReport::passed() const {
  if (!complete) return false;
  return std::all_of(assertions.begin(), assertions.end(), [](const LadderAssertion& a) { return a.passed; });
}

namespace {

// Strictly decreasing over the last `count` entries; an exactly zero pair
// (a ladder that sits on the zero solution) also counts as settled.
LadderAssertion decreasing_tail(const std::string& name, const std::vector<double>& v, std::size_t count) {
  LadderAssertion a{name, true, {}};
  if (v.size() < count) {
    a.passed = false;
    a.detail = "only " + std::to_string(v.size()) + " values";
    return a;
  }
  for (std::size_t i = v.size() - count; i < v.size(); ++i) {
    a.detail += (a.detail.empty() ? "" : " > ") + fmt(v[i]);
    if (i > v.size() - count && !(v[i] < v[i - 1]) && !(v[i] == 0.0 && v[i - 1] == 0.0)) a.passed = false;
  }
  return a;
}

LadderAssertion spread_below(const std::string& name, const std::vector<double>& v, double frac) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double spread = *hi - *lo;
  LadderAssertion a{name, spread <= frac * *hi, {}};
  a.detail = "spread=" + fmt(spread) + " max=" + fmt(*hi);
  return a;
}

// The sequence settles: its level-to-level changes shrink over the final three
// levels and the final change is below frac * max.
LadderAssertion settles(const std::string& name, const std::vector<double>& v, double frac) {
  LadderAssertion a{name, true, {}};
  if (v.size() < 4) return {name, false, "fewer than 4 levels"};
  const double hi = *std::max_element(v.begin(), v.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
  std::vector<double> d;
  for (std::size_t i = v.size() - 3; i < v.size(); ++i) d.push_back(std::abs(v[i] - v[i - 1]));
  a.passed = d[1] <= d[0] && d[2] <= d[1] && d[2] <= frac * std::abs(hi);
  a.detail = "changes=" + fmt(d[0]) + "," + fmt(d[1]) + "," + fmt(d[2]) + " max=" + fmt(std::abs(hi));
  return a;
}

}  // namespace

// The monotonicity assertions look at the final four levels.
constexpr int kMinLevels = 4;

LadderReport run_ladder(const LadderConfig& cfg, const ProblemInstance& tmpl, const SolverOptions& opts) {
  validate_ladder_config(cfg);
  validate_instance(tmpl);
  const bool homogeneous = cfg.mode == LadderMode::homogeneous;
  if (homogeneous && tmpl.datum.f.max_abs() > 0.0)
    throw std::invalid_argument("ladder: homogeneous mode requires a zero datum");

  LadderReport rep;
  rep.config = cfg;
  const ExponentVector& p = tmpl.flux.exponents;
  ProblemInstance inst = tmpl;
  inst.use_phi_reg = homogeneous;
  Field u(tmpl.grid);
  double eps = cfg.eps0;
  rep.complete = true;
  for (int l = 0; l < cfg.max_levels; ++l, eps *= cfg.rho) {
    inst.epsilon = eps;
    auto [next, sr] = solve_regularized(inst, u, opts);
    LevelRecord rec;
    rec.level = l;
    rec.epsilon = eps;
    rec.w_norm = anisotropic_norm(next, p);
    const Field phi = lower_order_field(inst, next);
    if (homogeneous) {
      rec.phi_integral = inner(phi, next);
    } else {
      double s = 0.0;
      for (std::size_t i = 0; i < phi.size(); ++i) s += std::abs(phi[i]);
      rec.phi_integral = s * tmpl.grid.cell_volume();
    }
    if (l > 0) rec.increment = anisotropic_norm(next - u, p);
    rec.energy_residual = energy_residual(next, inst);
    rec.iterations = sr.iterations;
    rec.solve_residual = sr.residual;
    rec.converged = sr.converged;
    rec.history = std::move(sr.history);
    rep.levels.push_back(rec);
    rep.fields.push_back(next);
    u = std::move(next);
    if (!rec.converged) {
      rep.complete = false;
      break;
    }
    if (l + 1 >= kMinLevels && rec.increment && *rec.increment < cfg.stop_tol) break;
  }
  rep.U = u;

  // inst now carries the final epsilon, so the tail checks use the final instance.
  for (std::size_t l = 0; l < rep.levels.size(); ++l) {
    ProblemInstance at = inst;
    at.epsilon = rep.levels[l].epsilon;
    for (double k : cfg.k_list) {
      TruncationDiagnostics td;
      td.k = k;
      td.distance = anisotropic_norm(truncate(rep.fields[l], k) - truncate(rep.U, k), p);
      td.defect = defect(rep.fields[l], rep.U, k, tmpl.flux);
      td.tail = gk_tail_check(rep.fields[l], rep.U, k, at);
      rep.levels[l].truncation.push_back(td);
    }
  }
  if (!homogeneous) rep.integrability = uniform_integrability_scan(rep.U, inst, cfg.ui_levels, cfg.ui_fractions);

  std::vector<double> norms, phis, increments;
  for (const LevelRecord& r : rep.levels) {
    norms.push_back(r.w_norm);
    phis.push_back(r.phi_integral);
    if (r.increment) increments.push_back(*r.increment);
  }
  if (homogeneous) {
    rep.assertions.push_back(spread_below("bounded_w_norm", norms, 0.05));
  } else {
    rep.assertions.push_back(settles("bounded_w_norm", norms, 0.05));
    rep.assertions.push_back(settles("bounded_phi_l1", phis, 0.05));
  }
  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
    std::vector<double> dist, def;
    for (const LevelRecord& r : rep.levels) {
      dist.push_back(r.truncation[ki].distance);
      def.push_back(r.truncation[ki].defect);
    }
    const std::string k = fmt(cfg.k_list[ki]);
    rep.assertions.push_back(decreasing_tail("truncation_distance_k=" + k, dist, 4));
    rep.assertions.push_back(decreasing_tail("defect_k=" + k, def, 4));
    const double margin = rep.levels.back().truncation[ki].tail.margin;
    rep.assertions.push_back({"gk_tail_margin_k=" + k, margin >= 0.0, "margin=" + fmt(margin)});
  }
  rep.assertions.push_back(decreasing_tail("increments", increments, 3));
  const double er = rep.levels.back().energy_residual;
  rep.assertions.push_back({"energy_identity", er <= 1e-6, "residual=" + fmt(er)});
  if (rep.integrability) {
    rep.assertions.push_back(decreasing_tail("ui_tail_mass", rep.integrability->tail_mass, rep.integrability->tail_mass.size()));
    rep.assertions.push_back(decreasing_tail("ui_set_mass", rep.integrability->set_mass, rep.integrability->set_mass.size()));
  }
  return rep;
}

void write_ladder_report_csv(std::ostream& os, const LadderReport& rep) {
  os << "level,epsilon,w_norm,phi_integral,increment,energy_residual,iterations,solve_residual,converged";
  for (double k : rep.config.k_list) {
    const std::string s = fmt(k);
    os << ",distance_k" << s << ",defect_k" << s << ",gk_norm_k" << s << ",tail_rhs_k" << s << ",tail_margin_k" << s;
  }
  os << '\n';
  char buf[512];
  for (const LevelRecord& r : rep.levels) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%d", r.level, r.epsilon, r.w_norm,
                  r.phi_integral, r.increment.value_or(std::nan("")), r.energy_residual, r.iterations,
                  r.solve_residual, r.converged ? 1 : 0);
    os << buf;
    for (const TruncationDiagnostics& t : r.truncation) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g,%.17g", t.distance, t.defect, t.tail.lhs, t.tail.rhs,
                    t.tail.margin);
      os << buf;
    }
    os << '\n';
  }
}

void write_ladder_assertions_csv(std::ostream& os, const LadderReport& rep) {
  os << "name,passed,detail\n";
  for (const LadderAssertion& a : rep.assertions) os << a.name << ',' << (a.passed ? 1 : 0) << ",\"" << a.detail << "\"\n";
}

void write_integrability_csv(std::ostream& os, const IntegrabilityScan& scan) {
  os << "kind,parameter,mass\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "total,,%.17g\n", scan.total);
  os << buf;
  for (std::size_t i = 0; i < scan.levels.size(); ++i) {
    std::snprintf(buf, sizeof buf, "tail,%.17g,%.17g\n", scan.levels[i], scan.tail_mass[i]);
    os << buf;
  }
  for (std::size_t i = 0; i < scan.fractions.size(); ++i) {
    std::snprintf(buf, sizeof buf, "fraction,%.17g,%.17g\n", scan.fractions[i], scan.set_mass[i]);
    os << buf;
  }
}

}  // namespace anisolab
