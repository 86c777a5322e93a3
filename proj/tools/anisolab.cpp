#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "anisolab/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Solver laboratory for anisotropic elliptic problems with L1 data"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", anisolab::kVersion);

  std::string config_path;
  std::string out_dir;
  bool dump_fields = false;
  std::uint64_t seed = 0;
  for (const char* name : {"check", "solve", "ladder"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Configuration file (key = value)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    sub->add_flag("--dump-fields", dump_fields, "Write nodal fields under fields/");
    sub->add_option("--seed", seed, "Seed for randomized checks (overrides output.seed)");
  }
  CLI11_PARSE(app, argc, argv);

  const CLI::App* chosen = app.get_subcommands().front();
  try {
    anisolab::RunConfig cfg = anisolab::load_config(config_path);
    cfg.mode = anisolab::parse_mode(chosen->get_name());
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (dump_fields) cfg.dump_fields = true;
    if (chosen->count("--seed") > 0) cfg.seed = seed;
    const std::string base = std::filesystem::absolute(config_path).parent_path().string();
    const int code = anisolab::run(cfg, std::cerr, base);
    std::cout << chosen->get_name() << ": " << (code == anisolab::kExitOk ? "ok" : "failed") << " (" << cfg.out_dir
              << ")\n";
    return code;
  } catch (const anisolab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return anisolab::kExitBadConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return anisolab::kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return anisolab::kExitRuntimeError;
  }
}
