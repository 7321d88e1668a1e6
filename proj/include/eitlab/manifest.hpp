#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace eitlab {

// Reproducibility record written next to every output set. The hash covers
// the inputs that determine the outputs (subcommand, resolved config and
// flags, seed) and is embedded in every CSV, so re-runs are checkable
// byte-for-byte; wall-clock fields stay outside the hash.
struct RunManifest {
  std::string subcommand;
  nlohmann::json resolved;   // full resolved configuration + flags
  std::uint64_t seed = 0;
  std::string tool_version;
  std::vector<std::string> outputs;
  double duration_s = 0.0;

  std::string hash() const;  // FNV-1a 64 over the canonical payload
  nlohmann::json to_json() const;
};

std::string fnv1a_hex(const std::string& bytes);

// Write-to-temp-then-rename so partial files never appear.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace eitlab
