#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>

#include "m3pipe/hash.hpp"
#include "m3pipe/manifest.hpp"
#include "m3pipe/records.hpp"

namespace m3pipe {

// Streaming newline-delimited record reader. Memory is bounded by the longest
// line, not the shard size. Hashes raw bytes as it goes so a checksum can be
// verified at EOF without a second pass.
class ShardReader {
 public:
  explicit ShardReader(std::filesystem::path path,
                       std::optional<std::string> expected_checksum = std::nullopt);

  // Next record in file order; nullopt at EOF. Throws ParseError with the
  // 1-based line number on malformed lines, IntegrityError on checksum
  // mismatch (checked when the final record has been read).
  std::optional<Record> next();

  std::uint64_t line_number() const { return line_; }

 private:
  [[noreturn]] void fail_parse(const std::string& what);

  std::filesystem::path path_;
  std::ifstream in_;
  std::optional<std::string> expected_checksum_;
  Sha256Stream hasher_;
  std::uint64_t line_ = 0;
  bool eof_checked_ = false;
};

void for_each_record(const std::filesystem::path& shard_path,
                     const std::function<void(Record&&)>& fn,
                     std::optional<std::string> expected_checksum = std::nullopt);

// Writes one shard file, hashing the bytes it emits.
class ShardWriter {
 public:
  explicit ShardWriter(std::filesystem::path path);
  ~ShardWriter();
  ShardWriter(const ShardWriter&) = delete;
  ShardWriter& operator=(const ShardWriter&) = delete;

  void add(const Record& record);
  void add_line(const std::string& line);  // line without trailing newline
  std::uint64_t count() const { return count_; }

  // Closes the file and returns (count, checksum). No further adds.
  ShardEntry finish();

  // Abandons the shard and removes the partial file.
  void discard();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  Sha256Stream hasher_;
  std::uint64_t count_ = 0;
  bool finished_ = false;
};

// Shards a record stream into <dataset>.<lang>.shard-NNNNN.jsonl files of
// exactly shard_size records (except the last) and produces the manifest.
// On error or early destruction, partial outputs are removed.
class DatasetWriter {
 public:
  DatasetWriter(std::filesystem::path dir, std::string dataset_name, Lang language,
                RecordType record_type, std::uint64_t shard_size);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void add(const Record& record);

  // Finalizes shards, writes the manifest file, returns the manifest.
  Manifest finish();

  void discard();

 private:
  void open_next_shard();
  std::string shard_name(std::size_t index) const;

  std::filesystem::path dir_;
  Manifest manifest_;
  std::uint64_t shard_size_;
  std::unique_ptr<ShardWriter> current_;
  std::size_t shard_index_ = 0;
  bool finished_ = false;
};

// Streams every record of every shard of a manifest, in manifest order,
// verifying shard checksums.
void for_each_manifest_record(const std::filesystem::path& manifest_path,
                              const std::function<void(Record&&)>& fn);

std::uint64_t count_lines(const std::filesystem::path& path);

}  // namespace m3pipe
