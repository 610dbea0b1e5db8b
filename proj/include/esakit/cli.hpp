#pragma once

#include <string>
#include <vector>

namespace esakit::cli {

/// Process exit codes, one per error family.
enum ExitCode : int {
  kOk = 0,
  kVerdictFailed = 1,   // a theorem check or sweep reported a violation
  kIoError = 2,         // unreadable/unwritable file, malformed input file
  kSpecError = 3,       // invalid configuration, infeasible spec, hypothesis not met
  kShapeError = 4,      // dimension or layout mismatch
  kDegenerateRender = 5,
  kInternalError = 6,
};

/// Entry point of the `esakit` tool. Subcommands: transform, verify, sweep,
/// attnmap, compose. Global flags: --seed, --out, --config, --workers.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace esakit::cli
