#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fusetrack::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kInputParse = 3,
  kRuntime = 4,
};

/// Entry point of the `fusetrack` tool. `args` excludes the program name.
///
///   simulate  --out DIR [--config PATH] [--scenario NAME] [--seed N]
///   track     --log PATH (--query N | --query-plate ID | --query-json REC)
///             [--world PATH] [--config PATH] [--scenario NAME]
///             [--gate-threshold TAU] [--no-gate] [--out PATH]
///   retrieve  --log PATH (--query N | --query-plate ID | --query-json REC) [-k N]
///   bench     [--config PATH] [--scenario NAME] [--seed N] [--seeds COUNT]
///             [--gate-threshold TAU] [--out PATH]
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fusetrack::cli
