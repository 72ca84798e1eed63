#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace m3pipe {

// Machine-readable record of one command run: inputs, config binding,
// counts, timings. Written as JSON next to the command's outputs.
class RunSummary {
 public:
  RunSummary(std::string command, std::string config_hash);

  void add_input(const std::string& path);
  void add_output(const std::string& path);
  void set_count(const std::string& name, std::uint64_t value);

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  std::string config_hash_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::map<std::string, std::uint64_t> counts_;
  std::int64_t started_unix_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace m3pipe
