#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

namespace m3pipe {

// Progress record for a resumable shard job. The config_hash binds the
// checkpoint to one exact job configuration; resuming under a different
// hash is refused.
struct CheckpointState {
  std::string job_id;
  std::string config_hash;  // 64-hex
  std::set<int> completed_shards;
  std::int64_t timestamp = 0;  // unix seconds, informational only
};

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const std::string& job_id);

// Write-temp-then-rename, so a crash never leaves a torn checkpoint.
void save_checkpoint(const CheckpointState& state, const std::filesystem::path& dir);

// Returns false when no checkpoint exists. Throws IntegrityError when one
// exists but its config_hash differs from expected_config_hash.
bool load_checkpoint(const std::filesystem::path& dir, const std::string& job_id,
                     const std::string& expected_config_hash, CheckpointState& out);

}  // namespace m3pipe
