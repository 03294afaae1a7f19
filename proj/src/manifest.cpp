#include "fiberlink/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "fiberlink/error.hpp"

#ifndef FIBERLINK_VERSION
#define FIBERLINK_VERSION "dev"
#endif

namespace fiberlink::scenario {

namespace {

std::string to_hex(const unsigned char* data, unsigned int len) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xf]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  return to_hex(digest, len);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string tool_version() { return FIBERLINK_VERSION; }

nlohmann::json RunManifest::to_json(const std::filesystem::path& out_dir) const {
  nlohmann::json files_json = nlohmann::json::array();
  for (const auto& f : files) {
    const auto full = out_dir / f;
    files_json.push_back({{"path", f.generic_string()},
                          {"bytes", std::filesystem::file_size(full)},
                          {"sha256", sha256_file(full)}});
  }
  return {{"command", command},
          {"scenario_hash", scenario_hash},
          {"tool_version", tool_version},
          {"seed", seed},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"files", files_json}};
}

}  // namespace fiberlink::scenario
