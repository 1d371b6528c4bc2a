#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace saffn {

/// Exit statuses of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // bad subcommand, flag, config key or value
inline constexpr int kExitRuntime = 2;  // I/O, format, numeric or failed checks

/// Entry point of the `saffn` tool. `args[0]` is the subcommand:
///   synth, train, denoise, eval, gradcheck, macs, ablate.
/// Every subcommand accepts `--config FILE` with flat "key = value" lines
/// whose keys are the long flag names without dashes; explicit flags win over
/// the file, which wins over the defaults. The resolved configuration is
/// printed first as a block of the same syntax, so it can be fed back through
/// --config.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace saffn
