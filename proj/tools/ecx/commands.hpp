#pragma once

#include "ecx/run_config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ecx::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
};

// Each command reads everything it needs from the config. Results go to the
// configured output paths, or to `out` when none is set; diagnostics go to
// `err`.
int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_extract(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);

// Subsets of `names` with 1..cap elements, by size, then lexicographically by
// position.
std::vector<std::vector<std::string>> feature_subsets(const std::vector<std::string>& names,
                                                      int cap);

// Full command line: flag parsing, config merge, dispatch, exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ecx::cli
