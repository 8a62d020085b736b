#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace alab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitResource = 4;

/// Tool version embedded in every artifact.
inline constexpr const char* kToolVersion = "0.1.0";

/// Names of the subcommands, in help order.
const std::vector<std::string>& subcommands();

/// Parses the command line (without the program name), runs one
/// subcommand and returns the exit status. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace alab::cli
