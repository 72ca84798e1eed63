#include "m3pipe/summary.hpp"

#include <ctime>
#include <fstream>

#include "m3pipe/errors.hpp"

namespace m3pipe {

using nlohmann::json;

RunSummary::RunSummary(std::string command, std::string config_hash)
    : command_(std::move(command)),
      config_hash_(std::move(config_hash)),
      started_unix_(static_cast<std::int64_t>(::time(nullptr))),
      started_(std::chrono::steady_clock::now()) {}

void RunSummary::add_input(const std::string& path) { inputs_.push_back(path); }
void RunSummary::add_output(const std::string& path) { outputs_.push_back(path); }
void RunSummary::set_count(const std::string& name, std::uint64_t value) {
  counts_[name] = value;
}

json RunSummary::to_json() const {
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - started_)
                     .count();
  return json{{"command", command_},   {"config_hash", config_hash_},
              {"inputs", inputs_},     {"outputs", outputs_},
              {"counts", counts_},     {"started_unix", started_unix_},
              {"elapsed_ms", elapsed}};
}

void RunSummary::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write run summary " + path.string());
  out << to_json().dump(2) << "\n";
  if (!out) throw Error("I/O failure writing run summary " + path.string());
}

}  // namespace m3pipe
