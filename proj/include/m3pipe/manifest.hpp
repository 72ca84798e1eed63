#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "m3pipe/lang.hpp"
#include "m3pipe/records.hpp"

namespace m3pipe {

struct ShardEntry {
  std::string path;  // relative to the manifest's directory
  std::uint64_t sample_count = 0;
  std::string checksum;  // 64-hex SHA-256 of the raw shard bytes

  bool operator==(const ShardEntry&) const = default;
};

// Integrity-checked index of a sharded dataset. File name on disk is
// <dataset>.<lang>.manifest next to its shards.
struct Manifest {
  std::string dataset_name;
  Lang language = Lang::en;
  int schema_version = 1;
  RecordType record_type = RecordType::sample;
  std::vector<ShardEntry> shards;
  std::uint64_t total_count = 0;

  std::string file_name() const;

  bool operator==(const Manifest&) const = default;
};

nlohmann::json to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& j);

// Writes <dir>/<dataset>.<lang>.manifest and returns its path.
std::filesystem::path save_manifest(const Manifest& manifest, const std::filesystem::path& dir);
Manifest load_manifest(const std::filesystem::path& path);

// Streams every shard: verifies checksums, per-line parse, per-shard counts,
// total count, and id uniqueness. Throws IntegrityError / ParseError.
void validate_manifest(const std::filesystem::path& path);

}  // namespace m3pipe
