#include "eitlab/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "eitlab/units.hpp"

namespace eitlab {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunManifest::hash() const {
  nlohmann::json payload;
  payload["subcommand"] = subcommand;
  payload["resolved"] = resolved;
  payload["seed"] = seed;
  payload["tool_version"] = tool_version;
  return fnv1a_hex(payload.dump());
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json doc;
  doc["tool"] = kToolName;
  doc["tool_version"] = tool_version;
  doc["subcommand"] = subcommand;
  doc["seed"] = seed;
  doc["resolved"] = resolved;
  doc["outputs"] = outputs;
  doc["duration_s"] = duration_s;
  doc["hash"] = hash();
  return doc;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << contents;
    if (!out) throw std::runtime_error("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

}  // namespace eitlab
