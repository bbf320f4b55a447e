#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace citegap::cli {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,   // bad flags or option values
  kExitIo = 2,      // missing input, unwritable output
  kExitSchema = 3,  // malformed or inconsistent input files
  kExitFailure = 4, // anything else
};

inline constexpr const char* kVersion = "0.1.0";

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a 64-bit hash, used for the config_hash header field.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace citegap::cli
