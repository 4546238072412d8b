#pragma once

#include <iosfwd>
#include <string>

#include "config.hpp"

namespace partshare::tools {

/// The five subcommands. Each throws library errors; progress and results
/// go to `out`. Return value is the process exit code for non-throwing
/// outcomes (cmd_verify returns 1 on a mismatch).
int cmd_build(const ExperimentConfig& cfg, std::ostream& out);
int cmd_sample(const ExperimentConfig& cfg, std::ostream& out);
int cmd_detect(const ExperimentConfig& cfg, std::ostream& out);
int cmd_complexity(const ExperimentConfig& cfg, std::ostream& out);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& out);

/// Dispatches by name and maps errors to exit codes: 0 success,
/// 1 verification mismatch, 2 config/format errors, 3 generative failures,
/// 4 parameter mismatches. Diagnostics go to `err`.
int run_command(const std::string& name, const ExperimentConfig& cfg, std::ostream& out,
                std::ostream& err);

}  // namespace partshare::tools
