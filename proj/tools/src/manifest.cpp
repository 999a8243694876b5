#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>

#include <json.hpp>

#include "persuade/error.hpp"

namespace persuade::cli {

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "sha256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& out) {
  auto p = out;
  p.replace_extension(".manifest.json");
  return p;
}

std::string manifest_to_json(const RunManifest& m) {
  nlohmann::json doc{{"command", m.command},
                     {"config_path", m.config_path},
                     {"config_sha256", m.config_sha256},
                     {"tool_version", m.version},
                     {"parameters", m.parameters},
                     {"outputs", m.outputs},
                     {"started_at", m.started_at},
                     {"finished_at", m.finished_at}};
  return doc.dump(2) + "\n";
}

}  // namespace persuade::cli
