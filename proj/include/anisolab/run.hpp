#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "anisolab/config.hpp"

namespace anisolab {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit codes of a run.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailed = 1,       // a check, solve or ladder assertion failed
  kExitBadConfig = 2,
  kExitRuntimeError = 3,
};

/// Structural checks selected by the config, all drawn from one generator seeded with cfg.seed.
std::vector<CheckResult> run_checks(const RunConfig& cfg, const ProblemInstance& inst);

/// Runs cfg.mode and writes manifest.txt, config.cfg, report.csv and fields/ under
/// cfg.out_dir. Relative data paths resolve against `base_dir`. Progress lines go to `log`.
int run(const RunConfig& cfg, std::ostream& log, const std::string& base_dir = ".");

void write_checks_csv(std::ostream& os, const std::vector<CheckResult>& checks);

}  // namespace anisolab
