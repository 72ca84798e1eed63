#include "m3pipe/manifest.hpp"

#include <fstream>
#include <unordered_set>

#include "m3pipe/errors.hpp"
#include "m3pipe/shard_io.hpp"

namespace m3pipe {

using nlohmann::json;

std::string Manifest::file_name() const {
  return dataset_name + "." + std::string(to_string(language)) + ".manifest";
}

json to_json(const Manifest& manifest) {
  json shards = json::array();
  for (const ShardEntry& s : manifest.shards) {
    shards.push_back(
        {{"path", s.path}, {"sample_count", s.sample_count}, {"checksum", s.checksum}});
  }
  return json{{"dataset_name", manifest.dataset_name},
              {"language", std::string(to_string(manifest.language))},
              {"schema_version", manifest.schema_version},
              {"record_type", std::string(to_string(manifest.record_type))},
              {"shards", std::move(shards)},
              {"total_count", manifest.total_count}};
}

Manifest manifest_from_json(const json& j) {
  Manifest m;
  if (!j.is_object()) throw ValidationError("manifest is not a JSON object");
  m.dataset_name = j.at("dataset_name").get<std::string>();
  m.language = parse_lang(j.at("language").get<std::string>());
  m.schema_version = j.at("schema_version").get<int>();
  m.record_type = parse_record_type(j.value("record_type", "sample"));
  std::uint64_t sum = 0;
  for (const json& s : j.at("shards")) {
    ShardEntry e;
    e.path = s.at("path").get<std::string>();
    e.sample_count = s.at("sample_count").get<std::uint64_t>();
    e.checksum = s.at("checksum").get<std::string>();
    if (e.checksum.size() != 64 ||
        e.checksum.find_first_not_of("0123456789abcdef") != std::string::npos) {
      throw ValidationError("shard checksum for '" + e.path + "' is not 64 hex digits");
    }
    sum += e.sample_count;
    m.shards.push_back(std::move(e));
  }
  m.total_count = j.at("total_count").get<std::uint64_t>();
  if (m.total_count != sum) {
    throw IntegrityError("manifest total_count " + std::to_string(m.total_count) +
                         " does not equal sum of shard counts " + std::to_string(sum));
  }
  return m;
}

std::filesystem::path save_manifest(const Manifest& manifest, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::filesystem::path path = dir / manifest.file_name();
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write manifest " + path.string());
    out << to_json(manifest).dump(2) << "\n";
    if (!out) throw Error("I/O failure writing manifest " + path.string());
  }
  std::filesystem::rename(tmp, path);
  return path;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("manifest " + path.string() + " does not parse: " + e.what());
  }
  return manifest_from_json(j);
}

void validate_manifest(const std::filesystem::path& path) {
  Manifest m = load_manifest(path);
  std::filesystem::path dir = path.parent_path();
  std::unordered_set<std::string> ids;
  ids.reserve(m.total_count);
  std::uint64_t total = 0;
  for (const ShardEntry& shard : m.shards) {
    std::filesystem::path shard_path = dir / shard.path;
    std::uint64_t count = 0;
    for_each_record(
        shard_path,
        [&](Record&& rec) {
          ++count;
          const std::string& id = record_id(rec);
          if (!ids.insert(id).second) {
            throw IntegrityError("duplicate record id '" + id + "' in " + shard_path.string());
          }
          if (m.record_type != RecordType::mixed && record_type_of(rec) != m.record_type) {
            throw IntegrityError("record '" + id + "' has type " +
                                 std::string(to_string(record_type_of(rec))) +
                                 " but manifest declares " +
                                 std::string(to_string(m.record_type)));
          }
        },
        shard.checksum);
    if (count != shard.sample_count) {
      throw IntegrityError("shard " + shard.path + " holds " + std::to_string(count) +
                           " records, manifest says " + std::to_string(shard.sample_count));
    }
    total += count;
  }
  if (total != m.total_count) {
    throw IntegrityError("manifest total_count mismatch for " + path.string());
  }
}

}  // namespace m3pipe
