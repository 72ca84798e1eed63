#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "m3pipe/lang.hpp"

namespace m3pipe {

// Single configuration surface for every command. Serialization is canonical
// (sorted keys, compact), so config_hash is stable across key order and
// whichever of file/env/CLI supplied each value.
struct PipelineConfig {
  std::string translate_url = "mock:";
  std::string embed_url = "mock:";
  std::string generate_url = "mock:";
  std::vector<std::string> languages;  // target languages; defaults to all 10
  std::uint64_t shard_size = 10000;
  int parallelism = 4;
  std::uint64_t seed = 42;
  std::string checkpoint_dir = ".m3pipe/checkpoints";
  std::vector<std::string> placeholder_patterns;  // defaults from placeholder.hpp
  double similarity_threshold = 0.0;
  double flag_threshold = 2.0;
  int retries = 3;
  int backoff_base_ms = 500;
  double backoff_factor = 2.0;
  int batch_cap = 64;
  std::uint64_t min_caption_chars = 16;
  int max_tokens = 64;
  std::string auth_token;  // excluded from config_hash

  std::vector<Lang> target_langs() const;
};

PipelineConfig default_config();

nlohmann::json to_json(const PipelineConfig& config);

// Canonical serialization with auth_token removed; hash input for
// config_hash().
std::string canonical_config_string(const PipelineConfig& config);
std::string config_hash(const PipelineConfig& config);

// Precedence: cli_overrides > env > file > defaults. Unknown keys are
// rejected with a nearest-key suggestion; invalid values name their key.
// Values arriving from env or CLI are strings; lists are comma-separated.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const std::map<std::string, std::string>& env,
                           const std::map<std::string, std::string>& cli_overrides);

// Collects M3_-prefixed variables from the process environment.
std::map<std::string, std::string> env_overrides();

// "m3pipe.conf" in the working directory, when present.
std::optional<std::filesystem::path> default_config_file();

}  // namespace m3pipe
