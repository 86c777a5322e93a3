#include "anisolab/run.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

namespace anisolab {

namespace {

namespace fs = std::filesystem;

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

// sup over a random cloud of ||psi(u)||_{L^{r'}}, bucketed by the amplitude of u.
CheckResult check_psi_bound(const BOperatorSpec& b, const Grid& grid, Rng& rng) {
  const double rp = b.r > 1.0 ? b.r / (b.r - 1.0) : std::numeric_limits<double>::infinity();
  CheckResult res{"psi_bound", true, 0.0, 0, {}};
  double small = 0.0, large = 0.0;
  for (int e = -2; e <= 4; ++e) {
    for (int s = 0; s < 30; ++s) {
      Field u = random_smooth_field(grid, rng);
      u *= std::pow(10.0, e) / std::max(u.max_abs(), 1e-300);
      const double v = lq_norm(psi_field(b, u), rp);
      res.statistic = std::max(res.statistic, v);
      if (e <= 0) small = std::max(small, v);
      if (e == 4) large = std::max(large, v);
      ++res.samples;
    }
  }
  res.passed = std::isfinite(res.statistic) && large <= 10.0 * std::max(small, 1e-300);
  if (!res.passed) res.witness = "norm grows from " + fmt(small) + " (|u|<=1) to " + fmt(large) + " (|u|=1e4)";
  return res;
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, double seconds, const std::vector<std::string>& extra) {
  std::ofstream os = open_out(dir / "manifest.txt");
  os << "anisolab " << kVersion << '\n';
  os << "mode " << to_string(cfg.mode) << '\n';
  os << "seed " << cfg.seed << '\n';
  os << "compiler " << __VERSION__ << '\n';
  os << "eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
  os << "wall_time_s " << fmt(seconds) << '\n';
  for (const std::string& line : extra) os << line << '\n';
  os << "[config]\n" << serialize_config(cfg);
}

void dump_field(const fs::path& dir, const std::string& name, const Field& f) {
  fs::create_directories(dir / "fields");
  write_field_csv((dir / "fields" / (name + ".csv")).string(), f);
}

bool all_passed(const std::vector<CheckResult>& checks) {
  for (const CheckResult& c : checks)
    if (!c.passed) return false;
  return true;
}

void log_failures(std::ostream& log, const std::vector<CheckResult>& checks) {
  for (const CheckResult& c : checks)
    if (!c.passed) log << "check " << c.name << " failed" << (c.witness.empty() ? "" : ": " + c.witness) << '\n';
}

}  // namespace

void write_checks_csv(std::ostream& os, const std::vector<CheckResult>& checks) {
  os << "check,passed,statistic,samples,witness\n";
  for (const CheckResult& c : checks)
    os << c.name << ',' << (c.passed ? 1 : 0) << ',' << fmt(c.statistic) << ',' << c.samples << ',' << quoted(c.witness)
       << '\n';
}

std::vector<CheckResult> run_checks(const RunConfig& cfg, const ProblemInstance& inst) {
  Rng rng(cfg.seed);
  std::vector<CheckResult> out;
  const Validation v = validate(cfg.p);
  out.push_back({"exponents", v.ok, harmonic_mean(cfg.p), 1, v.violation});

  if (inst.flux.kind == FluxKind::custom) {
    out.push_back(check_coercivity(as_function(inst.flux), cfg.p, inst.flux.nu0, cfg.check_samples, rng));
    out.push_back(check_monotonicity(as_function(inst.flux), cfg.p, cfg.check_samples, rng));
  } else {
    out.push_back(check_coercivity(inst.flux, cfg.check_samples, rng));
    out.push_back(check_monotonicity(inst.flux, cfg.check_samples, rng));
    out.push_back(check_growth(inst.flux, cfg.check_samples, rng));
  }

  out.push_back(check_sign(inst.lower, cfg.check_samples, rng));
  if (inst.lower.kind != PhiKind::zero) {
    out.push_back(check_growth_phi(inst.lower, cfg.check_samples, rng));
    out.push_back(check_lower_bound(inst.lower, cfg.check_samples, rng));
    out.push_back(check_zeta_monotone(inst.lower));
  }

  const Validation pv = validate_p1_constants(cfg.b_p1, cfg.p);
  out.push_back({"p1_constants", pv.ok, cfg.b_p1.b, 1, pv.violation});
  const P1Report p1 = check_P1(inst.b, cfg.p, cfg.check_p1_cloud, rng);
  CheckResult fit{"p1_fit", p1.finite_fit && !p1.growth_in_u, p1.fitted_C, p1.pairs, {}};
  if (!p1.finite_fit) fit.witness = "no constant below 1e6 fits";
  if (p1.growth_in_u) fit.witness += (fit.witness.empty() ? "" : "; ") + std::string("ratio grows with ||u||");
  out.push_back(fit);
  if (inst.b.psi != PsiKind::zero) out.push_back(check_psi_bound(inst.b, inst.grid, rng));
  return out;
}

int run(const RunConfig& cfg, std::ostream& log, const std::string& base_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  {
    std::ofstream os = open_out(dir / "config.cfg");
    os << serialize_config(cfg);
  }
  const ProblemInstance inst = make_instance(cfg, base_dir);
  std::vector<std::string> extra;
  int code = kExitOk;
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  switch (cfg.mode) {
    case RunMode::check: {
      const std::vector<CheckResult> checks = run_checks(cfg, inst);
      std::ofstream os = open_out(dir / "report.csv");
      write_checks_csv(os, checks);
      log_failures(log, checks);
      code = all_passed(checks) ? kExitOk : kExitFailed;
      extra.push_back(std::string("result ") + (code == kExitOk ? "pass" : "fail"));
      break;
    }
    case RunMode::solve: {
      if (inst.lower.kind == PhiKind::custom) {
        Rng rng(cfg.seed);
        const std::vector<CheckResult> checks{check_sign(inst.lower, 100000, rng),
                                              check_growth_phi(inst.lower, 100000, rng),
                                              check_lower_bound(inst.lower, 100000, rng)};
        if (!all_passed(checks)) {
          std::ofstream os = open_out(dir / "report.csv");
          write_checks_csv(os, checks);
          log_failures(log, checks);
          extra.emplace_back("result rejected: custom lower-order term fails its checks");
          write_manifest(dir, cfg, elapsed(), extra);
          return kExitFailed;
        }
      }
      auto [u, rep] = solve_regularized(inst, Field(inst.grid), cfg.solver);
      {
        std::ofstream os = open_out(dir / "report.csv");
        write_solve_report_csv(os, rep);
      }
      {
        std::ofstream os = open_out(dir / "delta_ladder.csv");
        os << "delta,iterations,residual,converged\n";
        for (const DeltaLevel& l : rep.delta_ladder)
          os << fmt(l.delta) << ',' << l.iterations << ',' << fmt(l.residual) << ',' << (l.converged ? 1 : 0) << '\n';
      }
      dump_field(dir, "u", u);
      if (cfg.dump_fields) {
        dump_field(dir, "f_eps", datum_field(inst));
        dump_field(dir, "residual", residual(inst, u));
      }
      extra.push_back("result.converged " + std::string(rep.converged ? "true" : "false"));
      extra.push_back("result.residual " + fmt(rep.residual));
      extra.push_back("result.iterations " + std::to_string(rep.iterations));
      extra.push_back("result.energy_residual " + fmt(energy_residual(u, inst)));
      log << "solve: converged=" << (rep.converged ? "true" : "false") << " residual=" << fmt(rep.residual)
          << " iterations=" << rep.iterations << '\n';
      code = rep.converged ? kExitOk : kExitFailed;
      break;
    }
    case RunMode::ladder: {
      const LadderReport rep = run_ladder(cfg.ladder, inst, cfg.solver);
      {
        std::ofstream os = open_out(dir / "report.csv");
        write_ladder_report_csv(os, rep);
      }
      {
        std::ofstream os = open_out(dir / "assertions.csv");
        write_ladder_assertions_csv(os, rep);
      }
      if (rep.integrability) {
        std::ofstream os = open_out(dir / "integrability.csv");
        write_integrability_csv(os, *rep.integrability);
      }
      if (cfg.dump_fields) {
        for (std::size_t l = 0; l < rep.fields.size(); ++l) {
          char name[32];
          std::snprintf(name, sizeof name, "level_%02zu", l);
          dump_field(dir, name, rep.fields[l]);
        }
      }
      for (const LadderAssertion& a : rep.assertions)
        if (!a.passed) log << "ladder assertion " << a.name << " failed: " << a.detail << '\n';
      if (!rep.complete) log << "ladder stopped early: level " << rep.levels.back().level << " did not converge\n";
      extra.push_back("result.levels " + std::to_string(rep.levels.size()));
      extra.push_back("result.complete " + std::string(rep.complete ? "true" : "false"));
      extra.push_back("result.assertions " + std::string(rep.passed() ? "pass" : "fail"));
      code = rep.passed() || (cfg.ladder.diagnostic_only && rep.complete) ? kExitOk : kExitFailed;
      break;
    }
  }
  write_manifest(dir, cfg, elapsed(), extra);
  return code;
}

}  // namespace anisolab
