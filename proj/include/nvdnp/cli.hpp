// Command-line front end shared by all modules.
#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace nvdnp::cli {

enum ExitCode : int { kOk = 0, kComputation = 1, kUsage = 2 };

/// Runs one invocation.  argv[0] is the program name.
int cli_dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

/// Flat key=value text with '#' comments.  Throws std::runtime_error on
/// unreadable files or lines without '='.
std::map<std::string, std::string> read_config(const std::string& path);

/// Appends "--key=value" for every config key whose flag is not already on
/// the command line.  A "--config PATH" / "--config=PATH" pair is removed.
std::vector<std::string> merge_config(const std::vector<std::string>& argv);

/// Rounds to `digits` significant figures and prints without exponent,
/// e.g. (431.4, 2) -> "430", (0.1936, 2) -> "0.19".
std::string format_sig(double v, int digits);

}  // namespace nvdnp::cli
