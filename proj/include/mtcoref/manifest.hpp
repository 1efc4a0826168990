#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mtcoref {

inline constexpr const char* kToolVersion = "0.3.0";

/// Run record written as manifest.json into every output directory.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string subcommand;
  std::map<std::string, std::string> config;        // resolved flag values
  std::map<std::string, std::string> input_digests;  // path -> sha256
  std::string timestamp;                             // UTC, ISO-8601

  /// Digests every file in `inputs` (skipping empty paths).
  void digest_inputs(const std::vector<std::filesystem::path>& inputs);

  std::string to_json() const;
  void write(const std::filesystem::path& out_dir) const;
};

std::string utc_timestamp();

}  // namespace mtcoref
