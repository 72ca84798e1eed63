#include "m3pipe/checkpoint.hpp"

#include <chrono>
#include <fstream>

#include <json.hpp>

#include "m3pipe/errors.hpp"

namespace m3pipe {

using nlohmann::json;

std::filesystem::path checkpoint_path(const std::filesystem::path& dir,
                                      const std::string& job_id) {
  return dir / (job_id + ".ckpt.json");
}

void save_checkpoint(const CheckpointState& state, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json j{{"job_id", state.job_id},
         {"config_hash", state.config_hash},
         {"completed_shards", state.completed_shards},
         {"timestamp", state.timestamp}};
  std::filesystem::path path = checkpoint_path(dir, state.job_id);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << j.dump() << "\n";
    if (!out) throw Error("I/O failure writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

bool load_checkpoint(const std::filesystem::path& dir, const std::string& job_id,
                     const std::string& expected_config_hash, CheckpointState& out) {
  std::filesystem::path path = checkpoint_path(dir, job_id);
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IntegrityError("checkpoint " + path.string() + " does not parse: " + e.what());
  }
  out.job_id = j.at("job_id").get<std::string>();
  out.config_hash = j.at("config_hash").get<std::string>();
  out.completed_shards.clear();
  for (const json& s : j.at("completed_shards")) out.completed_shards.insert(s.get<int>());
  out.timestamp = j.value("timestamp", std::int64_t{0});
  if (out.config_hash != expected_config_hash) {
    throw IntegrityError("checkpoint " + path.string() +
                         " was written under a different job configuration (hash " +
                         out.config_hash + ", current " + expected_config_hash +
                         "); refusing to resume");
  }
  return true;
}

}  // namespace m3pipe
