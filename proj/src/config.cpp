#include "m3pipe/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "m3pipe/errors.hpp"
#include "m3pipe/hash.hpp"
#include "m3pipe/placeholder.hpp"

extern char** environ;

namespace m3pipe {

using nlohmann::json;

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> kKeys = {
      "translate_url",       "embed_url",      "generate_url", "languages",
      "shard_size",          "parallelism",    "seed",         "checkpoint_dir",
      "placeholder_patterns", "similarity_threshold", "flag_threshold", "retries",
      "backoff_base_ms",     "backoff_factor", "batch_cap",    "min_caption_chars",
      "max_tokens",          "auth_token"};
  return kKeys;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

[[noreturn]] void unknown_key(const std::string& key, const std::string& where) {
  std::string best;
  std::size_t best_dist = SIZE_MAX;
  for (const std::string& k : known_keys()) {
    std::size_t d = levenshtein(key, k);
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  std::string msg = "unknown " + where + " key '" + key + "'";
  if (best_dist <= 4) msg += "; did you mean '" + best + "'?";
  throw ValidationError(msg);
}

std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (begin <= value.size()) {
    std::size_t comma = value.find(',', begin);
    std::string item = value.substr(begin, comma == std::string::npos ? std::string::npos
                                                                      : comma - begin);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  try {
    if constexpr (std::is_floating_point_v<T>) {
      std::size_t used = 0;
      double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
      return static_cast<T>(v);
    } else if constexpr (std::is_signed_v<T>) {
      std::size_t used = 0;
      long long v = std::stoll(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
      return static_cast<T>(v);
    } else {
      std::size_t used = 0;
      unsigned long long v = std::stoull(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
      return static_cast<T>(v);
    }
  } catch (const std::exception&) {
    throw ValidationError("invalid value for '" + key + "': '" + value + "'");
  }
}

// Applies one string-typed override (env or CLI) onto the config.
void apply_string_override(PipelineConfig& config, const std::string& key,
                           const std::string& value, const std::string& where) {
  if (key == "translate_url") {
    config.translate_url = value;
  } else if (key == "embed_url") {
    config.embed_url = value;
  } else if (key == "generate_url") {
    config.generate_url = value;
  } else if (key == "languages") {
    config.languages = split_csv(value);
  } else if (key == "shard_size") {
    config.shard_size = parse_number<std::uint64_t>(key, value);
  } else if (key == "parallelism") {
    config.parallelism = parse_number<int>(key, value);
  } else if (key == "seed") {
    config.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "checkpoint_dir") {
    config.checkpoint_dir = value;
  } else if (key == "placeholder_patterns") {
    config.placeholder_patterns = split_csv(value);
  } else if (key == "similarity_threshold") {
    config.similarity_threshold = parse_number<double>(key, value);
  } else if (key == "flag_threshold") {
    config.flag_threshold = parse_number<double>(key, value);
  } else if (key == "retries") {
    config.retries = parse_number<int>(key, value);
  } else if (key == "backoff_base_ms") {
    config.backoff_base_ms = parse_number<int>(key, value);
  } else if (key == "backoff_factor") {
    config.backoff_factor = parse_number<double>(key, value);
  } else if (key == "batch_cap") {
    config.batch_cap = parse_number<int>(key, value);
  } else if (key == "min_caption_chars") {
    config.min_caption_chars = parse_number<std::uint64_t>(key, value);
  } else if (key == "max_tokens") {
    config.max_tokens = parse_number<int>(key, value);
  } else if (key == "auth_token") {
    config.auth_token = value;
  } else {
    unknown_key(key, where);
  }
}

void apply_file(PipelineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config file " + path.string() + " does not parse: " + e.what());
  }
  if (j.is_null()) return;  // empty file -> all defaults
  if (!j.is_object()) throw ValidationError("config file must hold a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    try {
      if (key == "translate_url") {
        config.translate_url = v.get<std::string>();
      } else if (key == "embed_url") {
        config.embed_url = v.get<std::string>();
      } else if (key == "generate_url") {
        config.generate_url = v.get<std::string>();
      } else if (key == "languages") {
        config.languages = v.get<std::vector<std::string>>();
      } else if (key == "shard_size") {
        config.shard_size = v.get<std::uint64_t>();
      } else if (key == "parallelism") {
        config.parallelism = v.get<int>();
      } else if (key == "seed") {
        config.seed = v.get<std::uint64_t>();
      } else if (key == "checkpoint_dir") {
        config.checkpoint_dir = v.get<std::string>();
      } else if (key == "placeholder_patterns") {
        config.placeholder_patterns = v.get<std::vector<std::string>>();
      } else if (key == "similarity_threshold") {
        config.similarity_threshold = v.get<double>();
      } else if (key == "flag_threshold") {
        config.flag_threshold = v.get<double>();
      } else if (key == "retries") {
        config.retries = v.get<int>();
      } else if (key == "backoff_base_ms") {
        config.backoff_base_ms = v.get<int>();
      } else if (key == "backoff_factor") {
        config.backoff_factor = v.get<double>();
      } else if (key == "batch_cap") {
        config.batch_cap = v.get<int>();
      } else if (key == "min_caption_chars") {
        config.min_caption_chars = v.get<std::uint64_t>();
      } else if (key == "max_tokens") {
        config.max_tokens = v.get<int>();
      } else if (key == "auth_token") {
        config.auth_token = v.get<std::string>();
      } else {
        unknown_key(key, "config file");
      }
    } catch (const json::exception&) {
      throw ValidationError("invalid value for config key '" + key + "'");
    }
  }
}

void validate(const PipelineConfig& config) {
  for (const std::string& code : config.languages) {
    if (!is_valid_lang(code)) {
      throw ValidationError("invalid value for 'languages': unknown code '" + code + "'");
    }
  }
  if (config.shard_size < 1) throw ValidationError("invalid value for 'shard_size': must be >= 1");
  if (config.parallelism < 1) {
    throw ValidationError("invalid value for 'parallelism': must be >= 1");
  }
  if (config.similarity_threshold < -1.0 || config.similarity_threshold > 1.0) {
    throw ValidationError("invalid value for 'similarity_threshold': must be in [-1, 1]");
  }
  if (config.flag_threshold < 0.0) {
    throw ValidationError("invalid value for 'flag_threshold': must be >= 0");
  }
  if (config.retries < 1) throw ValidationError("invalid value for 'retries': must be >= 1");
  if (config.backoff_base_ms < 0) {
    throw ValidationError("invalid value for 'backoff_base_ms': must be >= 0");
  }
  if (config.backoff_factor < 1.0) {
    throw ValidationError("invalid value for 'backoff_factor': must be >= 1");
  }
  if (config.batch_cap < 1) throw ValidationError("invalid value for 'batch_cap': must be >= 1");
  if (config.max_tokens < 1) throw ValidationError("invalid value for 'max_tokens': must be >= 1");
}

}  // namespace

std::vector<Lang> PipelineConfig::target_langs() const {
  std::vector<Lang> out;
  for (const std::string& code : languages) out.push_back(parse_lang(code));
  return out;
}

PipelineConfig default_config() {
  PipelineConfig config;
  for (Lang l : m3pipe::target_langs()) config.languages.push_back(std::string(to_string(l)));
  config.placeholder_patterns = default_placeholder_patterns();
  return config;
}

json to_json(const PipelineConfig& config) {
  return json{{"translate_url", config.translate_url},
              {"embed_url", config.embed_url},
              {"generate_url", config.generate_url},
              {"languages", config.languages},
              {"shard_size", config.shard_size},
              {"parallelism", config.parallelism},
              {"seed", config.seed},
              {"checkpoint_dir", config.checkpoint_dir},
              {"placeholder_patterns", config.placeholder_patterns},
              {"similarity_threshold", config.similarity_threshold},
              {"flag_threshold", config.flag_threshold},
              {"retries", config.retries},
              {"backoff_base_ms", config.backoff_base_ms},
              {"backoff_factor", config.backoff_factor},
              {"batch_cap", config.batch_cap},
              {"min_caption_chars", config.min_caption_chars},
              {"max_tokens", config.max_tokens},
              {"auth_token", config.auth_token}};
}

std::string canonical_config_string(const PipelineConfig& config) {
  json j = to_json(config);
  j.erase("auth_token");  // secrets never bind checkpoints
  return j.dump();
}

std::string config_hash(const PipelineConfig& config) {
  return sha256_hex(canonical_config_string(config));
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const std::map<std::string, std::string>& env,
                           const std::map<std::string, std::string>& cli_overrides) {
  PipelineConfig config = default_config();
  if (file) apply_file(config, *file);
  for (const auto& [key, value] : env) apply_string_override(config, key, value, "environment");
  for (const auto& [key, value] : cli_overrides) {
    apply_string_override(config, key, value, "command-line");
  }
  validate(config);
  return config;
}

std::map<std::string, std::string> env_overrides() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string entry(*e);
    if (entry.rfind("M3_", 0) != 0) continue;
    std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(3, eq - 3);
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    out[key] = entry.substr(eq + 1);
  }
  return out;
}

std::optional<std::filesystem::path> default_config_file() {
  std::filesystem::path path = "m3pipe.conf";
  if (std::filesystem::exists(path)) return path;
  return std::nullopt;
}

}  // namespace m3pipe
