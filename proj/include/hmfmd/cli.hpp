#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hmfmd::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailure = 1,
  kExitUsage = 2,
  kExitData = 3,
};

/// Runs one command. `args` excludes the program name, e.g.
/// {"train", "--stage", "1", "--data", "d", "--out", "o"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

inline constexpr const char* kRunManifestFile = "run_manifest.json";

}  // namespace hmfmd::cli
