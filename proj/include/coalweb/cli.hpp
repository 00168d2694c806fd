#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coalweb/error.hpp"
#include "coalweb/experiments.hpp"

namespace coalweb {

struct CliParseError : InvalidArgument {
  CliParseError(const std::string& what, std::string usage_text)
      : InvalidArgument(what), usage(std::move(usage_text)) {}
  std::string usage;
};

struct CliInvocation {
  std::string subcommand;  // an experiment kind, "oracle" or "metrics"
  ExperimentConfig config;
  std::string out_dir = ".";
  std::string format = "csv";
  std::vector<std::string> path_files;  // metrics only
  int grid = 10000;                     // metrics only

  friend bool operator==(const CliInvocation&, const CliInvocation&) = default;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

// args excludes the program name. env_seed stands in for COALWEB_SEED.
// Throws CliParseError on anything that should exit with status 2.
CliInvocation parse_cli(const std::vector<std::string>& args, std::optional<std::string> env_seed = std::nullopt);
std::vector<std::string> render_cli(const CliInvocation& inv);

int execute(const CliInvocation& inv, std::ostream& out, std::ostream& err);

// Full entry point: parse, execute, map errors to exit codes.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coalweb
