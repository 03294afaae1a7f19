#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fiberlink::scenario {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Reproducibility record written next to every run's outputs.
struct RunManifest {
  std::string command;
  std::string scenario_hash;
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string started_at;  // ISO-8601 UTC
  std::string finished_at;
  std::vector<std::filesystem::path> files;  // relative to the output directory

  /// Checksums every listed file under `out_dir`.
  nlohmann::json to_json(const std::filesystem::path& out_dir) const;
};

std::string utc_timestamp();
std::string tool_version();

}  // namespace fiberlink::scenario
