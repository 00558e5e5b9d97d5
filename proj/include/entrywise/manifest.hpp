#pragma once

#include "entrywise/json_io.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace entrywise {

std::string version();

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct OutputRecord {
  std::string file;  // relative to the output directory
  std::string sha256;
};

/// Provenance record written next to command outputs. Everything except
/// `timings` is a function of the configuration and seeds.
struct RunManifest {
  std::string command;
  Json config = Json::object();
  Json seeds = Json::object();
  Json details = Json::object();
  std::vector<OutputRecord> outputs;
  Json timings = Json::object();

  // Hashes dir/name and appends it to the output list.
  void add_output(const std::filesystem::path& dir, const std::string& name);
  Json to_json() const;
  void write(const std::filesystem::path& path) const;
};

// Copy of a manifest JSON with the wall-clock section removed.
Json without_timings(Json manifest);

}  // namespace entrywise
