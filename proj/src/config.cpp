#include "anisolab/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace anisolab {

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::check:
      return "check";
    case RunMode::solve:
      return "solve";
    case RunMode::ladder:
      return "ladder";
  }
  return "?";
}

RunMode parse_mode(const std::string& s) {
  if (s == "check") return RunMode::check;
  if (s == "solve") return RunMode::solve;
  if (s == "ladder") return RunMode::ladder;
  throw std::invalid_argument("unknown mode '" + s + "' (expected check, solve or ladder)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("expected a number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw std::invalid_argument("'" + s + "' is not a number");
  return v;
}

long long to_integer(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("expected an integer");
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw std::invalid_argument("'" + s + "' is not an integer");
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  if (s.empty() || s[0] == '-') throw std::invalid_argument("expected an unsigned integer");
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw std::invalid_argument("'" + s + "' is not an unsigned integer");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split(s, ',')) out.push_back(to_double(item));
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

KnotTable to_table(const std::string& s) {
  KnotTable out;
  for (const std::string& item : split(s, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("table entry '" + item + "' is not t:value");
    out.emplace_back(to_double(trim(item.substr(0, colon))), to_double(trim(item.substr(colon + 1))));
  }
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i].first > out[i - 1].first)) throw std::invalid_argument("table abscissae must increase");
  return out;
}

std::string format_table(const KnotTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + fmt(t[i].first) + ":" + fmt(t[i].second);
  return out;
}

FieldSource to_source(const std::string& s) {
  if (s.rfind("file:", 0) == 0) {
    if (s.size() == 5) throw std::invalid_argument("file: needs a path");
    return {0.0, s.substr(5)};
  }
  return {to_double(s), {}};
}

std::string format_source(const FieldSource& f) { return f.path.empty() ? fmt(f.value) : "file:" + f.path; }

template <class E>
struct EnumNames {
  std::vector<std::pair<E, const char*>> names;
  E parse(const std::string& s) const {
    for (const auto& [e, n] : names)
      if (s == n) return e;
    std::string allowed;
    for (const auto& [e, n] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(n);
    throw std::invalid_argument("'" + s + "' is not one of " + allowed);
  }
  std::string format(E v) const {
    for (const auto& [e, n] : names)
      if (e == v) return n;
    return "?";
  }
};

const EnumNames<RunMode> kModes{{{RunMode::check, "check"}, {RunMode::solve, "solve"}, {RunMode::ladder, "ladder"}}};
const EnumNames<FluxChoice> kFluxes{
    {{FluxChoice::prototype, "prototype"}, {FluxChoice::coupled, "coupled"}, {FluxChoice::table, "table"}}};
const EnumNames<PhiChoice> kPhis{{{PhiChoice::model, "model"}, {PhiChoice::zero, "zero"}, {PhiChoice::table, "table"}}};
const EnumNames<PsiChoice> kPsis{
    {{PsiChoice::zero, "zero"}, {PsiChoice::bounded, "bounded"}, {PsiChoice::square, "square"}}};
const EnumNames<DatumChoice> kData{{{DatumChoice::zero, "zero"},
                                    {DatumChoice::constant, "constant"},
                                    {DatumChoice::singular, "singular"},
                                    {DatumChoice::file, "file"}}};
const EnumNames<LadderMode> kLadderModes{{{LadderMode::homogeneous, "homogeneous"}, {LadderMode::l1_data, "l1-data"}}};
const EnumNames<JacobianMode> kJacobians{
    {{JacobianMode::analytic, "analytic"}, {JacobianMode::finite_difference, "finite-difference"}}};

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> format;
};

#define ANISOLAB_DOUBLE(key, member) \
  Key{key, [](RunConfig& c, const std::string& v) { c.member = to_double(v); }, [](const RunConfig& c) { return fmt(c.member); }}
#define ANISOLAB_INT(key, member, type)                                                     \
  Key{key, [](RunConfig& c, const std::string& v) { c.member = static_cast<type>(to_integer(v)); }, \
      [](const RunConfig& c) { return std::to_string(c.member); }}
#define ANISOLAB_BOOL(key, member)                                               \
  Key{key, [](RunConfig& c, const std::string& v) { c.member = to_bool(v); }, \
      [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }}
#define ANISOLAB_LIST(key, member)                                                \
  Key{key, [](RunConfig& c, const std::string& v) { c.member = to_list(v); }, \
      [](const RunConfig& c) { return format_list(c.member); }}
#define ANISOLAB_ENUM(key, member, names)                                            \
  Key{key, [](RunConfig& c, const std::string& v) { c.member = names.parse(v); }, \
      [](const RunConfig& c) { return names.format(c.member); }}
#define ANISOLAB_STRING(key, member) \
  Key{key, [](RunConfig& c, const std::string& v) { c.member = v; }, [](const RunConfig& c) { return c.member; }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table{
      ANISOLAB_ENUM("mode", mode, kModes),
      Key{"problem.p", [](RunConfig& c, const std::string& v) { c.p = ExponentVector{to_list(v)}; },
          [](const RunConfig& c) { return format_list(c.p.p); }},
      ANISOLAB_INT("problem.n", n, int),
      ANISOLAB_DOUBLE("problem.epsilon", epsilon),
      ANISOLAB_BOOL("problem.phi_reg", phi_reg),
      ANISOLAB_ENUM("flux.kind", flux, kFluxes),
      ANISOLAB_DOUBLE("flux.scale", flux_scale),
      ANISOLAB_DOUBLE("flux.coupling", flux_coupling),
      Key{"flux.table", [](RunConfig& c, const std::string& v) { c.flux_table = to_table(v); },
          [](const RunConfig& c) { return format_table(c.flux_table); }},
      ANISOLAB_DOUBLE("flux.nu0", flux_nu0),
      ANISOLAB_ENUM("phi.kind", phi, kPhis),
      ANISOLAB_DOUBLE("phi.m", phi_m),
      ANISOLAB_DOUBLE("phi.tau", phi_tau),
      Key{"phi.table", [](RunConfig& c, const std::string& v) { c.phi_table = to_table(v); },
          [](const RunConfig& c) { return format_table(c.phi_table); }},
      ANISOLAB_DOUBLE("phi.gamma", phi_gamma),
      Key{"b.F", [](RunConfig& c, const std::string& v) { c.b_F = to_source(v); },
          [](const RunConfig& c) { return format_source(c.b_F); }},
      ANISOLAB_LIST("b.H", b_H),
      ANISOLAB_ENUM("b.psi", b_psi, kPsis),
      ANISOLAB_DOUBLE("b.g", b_g),
      ANISOLAB_DOUBLE("b.r", b_r),
      ANISOLAB_DOUBLE("b.C", b_p1.C),
      ANISOLAB_DOUBLE("b.s", b_p1.s),
      ANISOLAB_DOUBLE("b.a0", b_p1.a0),
      ANISOLAB_DOUBLE("b.b", b_p1.b),
      ANISOLAB_ENUM("datum.kind", datum, kData),
      ANISOLAB_DOUBLE("datum.value", datum_value),
      ANISOLAB_STRING("datum.path", datum_path),
      ANISOLAB_DOUBLE("datum.alpha", datum_alpha),
      ANISOLAB_LIST("datum.x0", datum_x0),
      ANISOLAB_DOUBLE("datum.amplitude", datum_amplitude),
      ANISOLAB_DOUBLE("ladder.eps0", ladder.eps0),
      ANISOLAB_DOUBLE("ladder.rho", ladder.rho),
      ANISOLAB_INT("ladder.levels", ladder.max_levels, int),
      ANISOLAB_DOUBLE("ladder.stop_tol", ladder.stop_tol),
      ANISOLAB_LIST("ladder.k_list", ladder.k_list),
      ANISOLAB_ENUM("ladder.mode", ladder.mode, kLadderModes),
      ANISOLAB_BOOL("ladder.diagnostic_only", ladder.diagnostic_only),
      ANISOLAB_LIST("ladder.ui_levels", ladder.ui_levels),
      ANISOLAB_LIST("ladder.ui_fractions", ladder.ui_fractions),
      ANISOLAB_DOUBLE("solver.tol", solver.tol),
      ANISOLAB_INT("solver.max_iter", solver.max_iter, int),
      ANISOLAB_DOUBLE("solver.delta0", solver.delta0),
      ANISOLAB_DOUBLE("solver.delta_min", solver.delta_min),
      ANISOLAB_DOUBLE("solver.delta_factor", solver.delta_factor),
      ANISOLAB_BOOL("solver.delta_continuation", solver.delta_continuation),
      ANISOLAB_INT("solver.stall_limit", solver.stall_limit, int),
      ANISOLAB_INT("solver.picard_steps", solver.picard_steps, int),
      ANISOLAB_DOUBLE("solver.armijo", solver.armijo),
      ANISOLAB_DOUBLE("solver.min_step", solver.min_step),
      ANISOLAB_DOUBLE("solver.final_jacobian_delta", solver.final_jacobian_delta),
      ANISOLAB_ENUM("solver.jacobian", solver.jacobian, kJacobians),
      ANISOLAB_STRING("output.dir", out_dir),
      ANISOLAB_BOOL("output.dump_fields", dump_fields),
      Key{"output.seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64(v); },
          [](const RunConfig& c) { return std::to_string(c.seed); }},
      ANISOLAB_INT("check.samples", check_samples, std::size_t),
      ANISOLAB_INT("check.p1_cloud", check_p1_cloud, std::size_t),
  };
  return table;
}

#undef ANISOLAB_DOUBLE
#undef ANISOLAB_INT
#undef ANISOLAB_BOOL
#undef ANISOLAB_LIST
#undef ANISOLAB_ENUM
#undef ANISOLAB_STRING

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::map<std::string, const Key*> index;
  for (const Key& k : keys()) index.emplace(k.name, &k);
  RunConfig cfg;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) throw ConfigError(line, "unknown key '" + key + "'");
    if (const auto prev = seen.find(key); prev != seen.end())
      throw ConfigError(line, "duplicate key '" + key + "' (first set on line " + std::to_string(prev->second) + ")");
    seen.emplace(key, line);
    try {
      it->second->parse(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(line, key + ": " + e.what());
    }
  }
  for (const char* required : {"problem.p", "problem.n"})
    if (!seen.count(required)) throw ConfigError(0, std::string("missing required key '") + required + "'");
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    // Point at the offending key when the message names one.
    for (const auto& [key, at] : seen)
      if (std::string(e.what()).rfind(key + ":", 0) == 0) throw ConfigError(at, e.what());
    throw;
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const Key& k : keys()) out += std::string(k.name) + " = " + k.format(cfg) + "\n";
  return out;
}

void validate_config(const RunConfig& cfg) {
  if (auto v = validate(cfg.p); !v) throw ConfigError(0, "problem.p: " + v.violation);
  if (cfg.n < 3) throw ConfigError(0, "problem.n: need at least 3 interior nodes per axis");
  if (!(cfg.epsilon > 0.0)) throw ConfigError(0, "problem.epsilon: must be > 0");
  if (cfg.flux == FluxChoice::table && cfg.flux_table.size() < 2)
    throw ConfigError(0, "flux.table: the table flux needs at least two knots");
  if (!(cfg.flux_scale > 0.0)) throw ConfigError(0, "flux.scale: must be > 0");
  if (!(cfg.flux_coupling >= 0.0)) throw ConfigError(0, "flux.coupling: must be >= 0");
  if (cfg.phi == PhiChoice::model && !(cfg.phi_m > 1.0)) throw ConfigError(0, "phi.m: must be > 1");
  if (!(cfg.phi_tau > 0.0)) throw ConfigError(0, "phi.tau: must be > 0");
  if (!(cfg.phi_gamma > 0.0)) throw ConfigError(0, "phi.gamma: must be > 0");
  if (cfg.phi == PhiChoice::table && cfg.phi_table.size() < 2)
    throw ConfigError(0, "phi.table: the table term needs at least two knots");
  if (!cfg.b_H.empty() && static_cast<int>(cfg.b_H.size()) != cfg.p.dim())
    throw ConfigError(0, "b.H: needs one value per axis");
  if (cfg.datum == DatumChoice::singular) {
    if (static_cast<int>(cfg.datum_x0.size()) != cfg.p.dim()) throw ConfigError(0, "datum.x0: needs one coordinate per axis");
    if (!(cfg.datum_alpha >= 0.0 && cfg.datum_alpha < cfg.p.dim())) throw ConfigError(0, "datum.alpha: need 0 <= alpha < N");
  }
  if (cfg.datum == DatumChoice::file && cfg.datum_path.empty()) throw ConfigError(0, "datum.path: required for a file datum");
  try {
    validate_ladder_config(cfg.ladder);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  if (!(cfg.solver.tol > 0.0)) throw ConfigError(0, "solver.tol: must be > 0");
  if (cfg.solver.max_iter < 1) throw ConfigError(0, "solver.max_iter: must be >= 1");
  if (!(cfg.solver.delta_factor > 0.0 && cfg.solver.delta_factor < 1.0))
    throw ConfigError(0, "solver.delta_factor: must lie in (0, 1)");
  if (!(cfg.solver.delta_min > 0.0)) throw ConfigError(0, "solver.delta_min: must be > 0");
  if (cfg.check_samples < 1000) throw ConfigError(0, "check.samples: at least 1000 required");
  if (cfg.check_p1_cloud < 100) throw ConfigError(0, "check.p1_cloud: at least 100 required");
}

namespace {

Field load_field(const std::string& path, const std::string& base_dir, const Grid& grid, const char* what) {
  const std::filesystem::path p = std::filesystem::path(path).is_absolute() ? std::filesystem::path(path)
                                                                             : std::filesystem::path(base_dir) / path;
  Field f = read_field_csv(p.string());
  if (!(f.grid() == grid)) throw ConfigError(0, std::string(what) + ": field file grid differs from problem grid");
  return f;
}

}  // namespace

ProblemInstance make_instance(const RunConfig& cfg, const std::string& base_dir) {
  validate_config(cfg);
  const Grid grid(cfg.p.dim(), cfg.n);
  ProblemInstance inst;
  inst.grid = grid;
  inst.epsilon = cfg.epsilon;
  inst.use_phi_reg = cfg.phi_reg;

  switch (cfg.flux) {
    case FluxChoice::prototype:
      inst.flux = make_prototype_flux(cfg.p, cfg.flux_scale);
      break;
    case FluxChoice::coupled:
      inst.flux = make_prototype_flux(cfg.p, cfg.flux_scale, cfg.flux_coupling);
      inst.flux.kind = FluxKind::coupled;
      break;
    case FluxChoice::table: {
      inst.flux.exponents = cfg.p;
      inst.flux.kind = FluxKind::custom;
      inst.flux.nu0 = cfg.flux_nu0;
      inst.flux.custom = [a = PiecewiseLinear{cfg.flux_table}](std::span<const double>, double,
                                                                std::span<const double> xi, std::span<double> out) {
        for (std::size_t j = 0; j < xi.size(); ++j) out[j] = a(xi[j]);
      };
      break;
    }
  }

  switch (cfg.phi) {
    case PhiChoice::model:
      inst.lower = make_model_phi(cfg.p, cfg.phi_m, cfg.phi_tau);
      break;
    case PhiChoice::zero:
      inst.lower = make_zero_phi(cfg.p);
      break;
    case PhiChoice::table: {
      PiecewiseLinear g{cfg.phi_table};
      inst.lower = make_table_phi(cfg.p, g);
      // zeta(s) = sup of |g| over [-s, s]; nondecreasing by construction.
      inst.lower.zeta = [g](double s) {
        double best = std::max(std::abs(g(-s)), std::abs(g(s)));
        for (const auto& [t, v] : g.knots)
          if (std::abs(t) <= s) best = std::max(best, std::abs(v));
        return best;
      };
      inst.lower.gamma = cfg.phi_gamma;
      inst.lower.tau = cfg.phi_tau;
      break;
    }
  }

  inst.b = make_zero_b(grid);
  inst.b.F = cfg.b_F.path.empty() ? Field(grid, cfg.b_F.value) : load_field(cfg.b_F.path, base_dir, grid, "b.F");
  for (std::size_t j = 0; j < cfg.b_H.size(); ++j)
    inst.b.H.emplace_back(grid, static_cast<int>(j), cfg.b_H[j]);
  inst.b.g = Field(grid, cfg.b_g);
  switch (cfg.b_psi) {
    case PsiChoice::zero:
      inst.b.psi = PsiKind::zero;
      break;
    case PsiChoice::bounded:
      inst.b.psi = PsiKind::bounded;
      break;
    case PsiChoice::square:
      inst.b.psi = PsiKind::custom;
      inst.b.psi_custom = [](double u, double g) { return g * u * u; };
      break;
  }
  inst.b.r = cfg.b_r;
  inst.b.p1 = cfg.b_p1;

  switch (cfg.datum) {
    case DatumChoice::zero:
      inst.datum.f = Field(grid);
      break;
    case DatumChoice::constant:
      inst.datum.f = Field(grid, cfg.datum_value);
      break;
    case DatumChoice::singular:
      inst.datum.f = singular_profile(grid, cfg.datum_x0, cfg.datum_alpha, cfg.datum_amplitude);
      break;
    case DatumChoice::file:
      inst.datum.f = load_field(cfg.datum_path, base_dir, grid, "datum.path");
      break;
  }
  return inst;
}

}  // namespace anisolab
