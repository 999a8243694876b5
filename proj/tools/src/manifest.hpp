#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace persuade::cli {

std::string sha256_hex(const std::string& bytes);
std::string utc_timestamp();

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_sha256;
  std::string version;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> outputs;
  std::string started_at;
  std::string finished_at;
};

/// out.json -> out.manifest.json
std::filesystem::path manifest_path_for(const std::filesystem::path& out);
std::string manifest_to_json(const RunManifest& m);

}  // namespace persuade::cli
