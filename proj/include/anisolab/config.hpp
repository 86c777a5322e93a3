#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisolab/continuation.hpp"

namespace anisolab {

/// Parse or validation failure. line() is 1-based, 0 when no single line is at fault.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

enum class RunMode { check, solve, ladder };

/// Nodal data given either as a constant or as a field CSV file.
struct FieldSource {
  double value = 0.0;
  std::string path;  // non-empty selects the file
  bool operator==(const FieldSource&) const = default;
};

/// Knot list "t0:g0,t1:g1,..." of a piecewise-linear function.
using KnotTable = std::vector<std::pair<double, double>>;

enum class FluxChoice { prototype, coupled, table };
enum class PhiChoice { model, zero, table };
enum class PsiChoice { zero, bounded, square };
enum class DatumChoice { zero, constant, singular, file };

struct RunConfig {
  RunMode mode = RunMode::solve;

  ExponentVector p;
  int n = 0;
  double epsilon = 0.1;
  bool phi_reg = true;

  FluxChoice flux = FluxChoice::prototype;
  double flux_scale = 1.0;
  double flux_coupling = 0.0;
  KnotTable flux_table;  // A_j(xi) = a(xi_j) for the check-only table flux
  double flux_nu0 = 1.0;

  PhiChoice phi = PhiChoice::model;
  double phi_m = 3.0;
  double phi_tau = 1.0;
  KnotTable phi_table;   // g(t) of g(t) (sum_j |xi_j|^{p_j} + 1)
  double phi_gamma = 1.0;

  FieldSource b_F{0.0, {}};
  std::vector<double> b_H;  // constant face values per axis; empty means zero
  PsiChoice b_psi = PsiChoice::bounded;
  double b_g = 1.0;
  double b_r = 1.0;
  P1Constants b_p1;

  DatumChoice datum = DatumChoice::zero;
  double datum_value = 0.0;
  std::string datum_path;
  double datum_alpha = 1.0;
  std::vector<double> datum_x0{0.5, 0.5};
  double datum_amplitude = 1.0;

  LadderConfig ladder;

  SolverOptions solver;

  std::string out_dir = "out";
  bool dump_fields = false;
  std::uint64_t seed = 1;

  std::size_t check_samples = 100000;
  std::size_t check_p1_cloud = 210;

  bool operator==(const RunConfig&) const = default;
};

/// key = value lines, '#' comments, blank lines ignored. Unknown and duplicate
/// keys are rejected; problem.p and problem.n are required.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Every key, in a fixed order; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

/// Cross-field validation (exponents, ladder, datum dimension); throws ConfigError.
void validate_config(const RunConfig& cfg);

/// Problem instance described by the config (grid, flux, Phi, B, datum).
/// Relative file paths resolve against `base_dir`.
ProblemInstance make_instance(const RunConfig& cfg, const std::string& base_dir = ".");

const char* to_string(RunMode m);
RunMode parse_mode(const std::string& s);

}  // namespace anisolab
