#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "anisolab/config.hpp"
#include "anisolab/run.hpp"

using namespace anisolab;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal =
    "mode = solve\n"
    "problem.p = 1.5,1.8\n"
    "problem.n = 32\n"
    "phi.kind = model\n"
    "phi.m = 3\n";

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_text(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("anisolab_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.mode == RunMode::solve);
  CHECK(c.p == ExponentVector{{1.5, 1.8}});
  CHECK(c.n == 32);
  CHECK(c.phi == PhiChoice::model);
  CHECK(c.phi_m == 3.0);
  CHECK(c.solver == SolverOptions{});
  CHECK(c.ladder == LadderConfig{});
}

TEST_CASE("exponent violations surface with the key's line") {
  const std::string text = "mode = solve\nproblem.n = 8\nproblem.p = 2,2\n";
  CHECK(error_text(text).find("p<N fails") != std::string::npos);
  CHECK(error_line(text) == 3);
}

TEST_CASE("duplicate, unknown and malformed keys report their line") {
  CHECK(error_line(kMinimal + "problem.n = 16\n") == 6);
  CHECK(error_text(kMinimal + "problem.n = 16\n").find("duplicate") != std::string::npos);
  CHECK(error_line("problem.p = 1.5,1.8\n\n# c\nproblem.size = 3\nproblem.n = 8\n") == 4);
  CHECK(error_line(kMinimal + "solver.tol\n") == 6);
  CHECK(error_line(kMinimal + "solver.tol = abc\n") == 6);
  CHECK(error_line(kMinimal + "ladder.mode = sideways\n") == 6);
  CHECK(error_line("mode = solve\nproblem.p = 1.5,1.8\n") == 0);
  CHECK(error_text("mode = solve\nproblem.p = 1.5,1.8\n").find("problem.n") != std::string::npos);
  CHECK(error_line("problem.p = 1.5,1.8\nproblem.n = 2\n") == 2);
}

TEST_CASE("serialize then parse is the identity") {
  RunConfig c = parse_config(kMinimal);
  c.mode = RunMode::ladder;
  c.p = {{1.2, 1.5, 2.0}};
  c.n = 9;
  c.epsilon = 1.0 / 3.0;
  c.flux = FluxChoice::coupled;
  c.flux_coupling = 0.25;
  c.phi = PhiChoice::table;
  c.phi_table = {{-1.0, -0.1}, {2.0, 0.7}};
  c.phi_gamma = 0.1;
  c.b_F = {0.0, "f.csv"};
  c.b_H = {0.1, 0.2, 1e-17};
  c.b_psi = PsiChoice::square;
  c.datum = DatumChoice::singular;
  c.datum_x0 = {0.3, 0.7, 0.1};
  c.datum_alpha = 0.9;
  c.ladder.mode = LadderMode::l1_data;
  c.ladder.k_list = {0.5, 3.0};
  c.ladder.diagnostic_only = true;
  c.solver.tol = 1e-9;
  c.solver.jacobian = JacobianMode::finite_difference;
  c.seed = 18446744073709551615ULL;
  c.dump_fields = true;
  c.out_dir = "results/run 1";
  const std::string text = serialize_config(c);
  const RunConfig back = parse_config(text);
  CHECK(back == c);
  CHECK(serialize_config(back) == text);
  CHECK(parse_config(serialize_config(parse_config(kMinimal))) == parse_config(kMinimal));
}

TEST_CASE("every shipped configuration parses and round-trips") {
  for (const auto& entry : fs::directory_iterator(ANISOLAB_CONFIG_DIR)) {
    CAPTURE(entry.path().string());
    const RunConfig c = load_config(entry.path().string());
    CHECK(parse_config(serialize_config(c)) == c);
  }
}

TEST_CASE("mode names") {
  for (RunMode m : {RunMode::check, RunMode::solve, RunMode::ladder}) CHECK(parse_mode(to_string(m)) == m);
  CHECK_THROWS(parse_mode("plot"));
}

TEST_CASE("check mode on the defaults passes and writes its artifacts") {
  RunConfig c = load_config(std::string(ANISOLAB_CONFIG_DIR) + "/check_defaults.cfg");
  c.check_samples = 5000;
  c.out_dir = scratch_dir("check").string();
  std::ostringstream log;
  CHECK(run(c, log) == kExitOk);
  for (const char* f : {"manifest.txt", "report.csv", "config.cfg"}) CHECK(fs::exists(fs::path(c.out_dir) / f));
  const std::string manifest = slurp(fs::path(c.out_dir) / "manifest.txt");
  CHECK(manifest.find("seed 1\n") != std::string::npos);
  CHECK(manifest.find("[config]\n" + serialize_config(c)) != std::string::npos);
  CHECK(parse_config(slurp(fs::path(c.out_dir) / "config.cfg")) == c);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  RunConfig c = parse_config(kMinimal);
  c.n = 10;
  c.b_F.value = 1.0;
  c.dump_fields = true;
  c.seed = 99;
  std::string first_report, first_field;
  for (int pass = 0; pass < 2; ++pass) {
    c.out_dir = scratch_dir("det" + std::to_string(pass)).string();
    std::ostringstream log;
    CHECK(run(c, log) == kExitOk);
    const std::string report = slurp(fs::path(c.out_dir) / "report.csv");
    const std::string field = slurp(fs::path(c.out_dir) / "fields" / "u.csv");
    if (pass == 0) {
      first_report = report;
      first_field = field;
    } else {
      CHECK(report == first_report);
      CHECK(field == first_field);
    }
  }

  c.mode = RunMode::check;
  c.check_samples = 2000;
  std::string first;
  for (int pass = 0; pass < 2; ++pass) {
    c.out_dir = scratch_dir("detc" + std::to_string(pass)).string();
    std::ostringstream log;
    run(c, log);
    const std::string report = slurp(fs::path(c.out_dir) / "report.csv");
    if (pass == 0) first = report;
    else CHECK(report == first);
  }
}

TEST_CASE("a sign-violating table term is rejected in solve mode") {
  RunConfig c = load_config(std::string(ANISOLAB_CONFIG_DIR) + "/broken_phi.cfg");
  c.out_dir = scratch_dir("broken").string();
  std::ostringstream log;
  CHECK(run(c, log) == kExitFailed);
  CHECK(log.str().find("phi_sign") != std::string::npos);
  CHECK(fs::exists(fs::path(c.out_dir) / "manifest.txt"));
}

TEST_CASE("zero-data ladder exits cleanly with an all-zero report") {
  RunConfig c = load_config(std::string(ANISOLAB_CONFIG_DIR) + "/zero_data.cfg");
  c.out_dir = scratch_dir("zero").string();
  std::ostringstream log;
  CHECK(run(c, log) == kExitOk);
  CHECK(fs::exists(fs::path(c.out_dir) / "assertions.csv"));
}
