#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace maxcorr::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 1,
  exit_data = 2,
  exit_infeasible = 3,
  exit_nonconvergence = 4,
};

enum class Format { json, csv };

struct Options {
  std::string command;  // fit | cca | ls-compare | target | resonance | predict
  std::string config;   // config file, or a fit artifact for predict
  std::string data;     // overrides the config's data path
  std::string out;      // empty writes to `out`
  std::optional<std::uint64_t> seed;
  std::optional<Format> format;  // per-command default when unset
};

/// Runs one command. Artifacts go to options.out (atomically) or to `out`;
/// diagnostics go to `err`. Returns the process exit code.
int execute(const Options& options, std::ostream& out, std::ostream& err);

/// Parses argv and calls execute.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Writes `content` to `path` via a temporary file and a rename.
void write_atomically(const std::string& path, const std::string& content);

}  // namespace maxcorr::cli
