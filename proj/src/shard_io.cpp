#include "m3pipe/shard_io.hpp"

#include <system_error>

#include "m3pipe/errors.hpp"

namespace m3pipe {

ShardReader::ShardReader(std::filesystem::path path, std::optional<std::string> expected_checksum)
    : path_(std::move(path)),
      in_(path_, std::ios::binary),
      expected_checksum_(std::move(expected_checksum)) {
  if (!in_) throw ValidationError("cannot open shard " + path_.string());
}

std::optional<Record> ShardReader::next() {
  std::string line;
  if (!std::getline(in_, line)) {
    if (expected_checksum_ && !eof_checked_) {
      eof_checked_ = true;
      std::string digest = hasher_.hex_digest();
      if (digest != *expected_checksum_) {
        throw IntegrityError("checksum mismatch for shard " + path_.string() + ": expected " +
                             *expected_checksum_ + ", got " + digest);
      }
    }
    return std::nullopt;
  }
  ++line_;
  hasher_.update(line);
  // getline strips the newline; writers always terminate lines with '\n'.
  if (!in_.eof()) hasher_.update("\n");
  try {
    return record_from_line(line);
  } catch (const nlohmann::json::exception& e) {
    fail_parse(std::string("malformed record: ") + e.what());
  } catch (const ValidationError& e) {
    fail_parse(e.what());
  }
}

// A malformed line inside a checksummed shard is more likely tampering than
// a writer bug, so the checksum verdict wins: hash the rest of the file and
// report an integrity error on mismatch, the parse error otherwise.
[[noreturn]] void ShardReader::fail_parse(const std::string& what) {
  std::uint64_t at_line = line_;
  if (expected_checksum_) {
    std::string rest;
    while (std::getline(in_, rest)) {
      hasher_.update(rest);
      if (!in_.eof()) hasher_.update("\n");
    }
    std::string digest = hasher_.hex_digest();
    eof_checked_ = true;
    if (digest != *expected_checksum_) {
      throw IntegrityError("checksum mismatch for shard " + path_.string() +
                           " (first parse failure at line " + std::to_string(at_line) + ")");
    }
  }
  throw ParseError(path_.string(), at_line, what);
}

void for_each_record(const std::filesystem::path& shard_path,
                     const std::function<void(Record&&)>& fn,
                     std::optional<std::string> expected_checksum) {
  ShardReader reader(shard_path, std::move(expected_checksum));
  while (auto rec = reader.next()) fn(std::move(*rec));
}

ShardWriter::ShardWriter(std::filesystem::path path)
    : path_(std::move(path)), out_(path_, std::ios::binary | std::ios::trunc) {
  if (!out_) throw ValidationError("cannot create shard " + path_.string());
}

ShardWriter::~ShardWriter() {
  if (!finished_) discard();
}

void ShardWriter::add(const Record& record) { add_line(record_to_line(record)); }

void ShardWriter::add_line(const std::string& line) {
  out_ << line << '\n';
  if (!out_) throw Error("I/O failure writing shard " + path_.string());
  hasher_.update(line);
  hasher_.update("\n");
  ++count_;
}

ShardEntry ShardWriter::finish() {
  out_.close();
  if (out_.fail()) throw Error("I/O failure closing shard " + path_.string());
  finished_ = true;
  return ShardEntry{path_.filename().string(), count_, hasher_.hex_digest()};
}

void ShardWriter::discard() {
  finished_ = true;
  out_.close();
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

DatasetWriter::DatasetWriter(std::filesystem::path dir, std::string dataset_name, Lang language,
                             RecordType record_type, std::uint64_t shard_size)
    : dir_(std::move(dir)), shard_size_(shard_size) {
  if (shard_size_ < 1) throw ValidationError("shard_size must be >= 1");
  manifest_.dataset_name = std::move(dataset_name);
  manifest_.language = language;
  manifest_.record_type = record_type;
  std::filesystem::create_directories(dir_);
}

DatasetWriter::~DatasetWriter() {
  if (!finished_) discard();
}

std::string DatasetWriter::shard_name(std::size_t index) const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05zu", index);
  return manifest_.dataset_name + "." + std::string(to_string(manifest_.language)) + ".shard-" +
         buf + ".jsonl";
}

void DatasetWriter::open_next_shard() {
  current_ = std::make_unique<ShardWriter>(dir_ / shard_name(shard_index_));
  ++shard_index_;
}

void DatasetWriter::add(const Record& record) {
  if (finished_) throw Error("DatasetWriter already finished");
  if (manifest_.record_type != RecordType::mixed &&
      record_type_of(record) != manifest_.record_type) {
    throw ValidationError("record '" + record_id(record) + "' has type " +
                          std::string(to_string(record_type_of(record))) +
                          " but dataset is declared " +
                          std::string(to_string(manifest_.record_type)));
  }
  if (!current_) open_next_shard();
  current_->add(record);
  ++manifest_.total_count;
  if (current_->count() == shard_size_) {
    manifest_.shards.push_back(current_->finish());
    current_.reset();
  }
}

Manifest DatasetWriter::finish() {
  if (finished_) throw Error("DatasetWriter already finished");
  if (current_ && current_->count() > 0) {
    manifest_.shards.push_back(current_->finish());
  } else if (current_) {
    current_->discard();
  }
  current_.reset();
  finished_ = true;
  save_manifest(manifest_, dir_);
  return manifest_;
}

void DatasetWriter::discard() {
  finished_ = true;
  if (current_) current_->discard();
  current_.reset();
  std::error_code ec;
  for (const ShardEntry& s : manifest_.shards) std::filesystem::remove(dir_ / s.path, ec);
}

void for_each_manifest_record(const std::filesystem::path& manifest_path,
                              const std::function<void(Record&&)>& fn) {
  Manifest m = load_manifest(manifest_path);
  std::filesystem::path dir = manifest_path.parent_path();
  for (const ShardEntry& shard : m.shards) {
    for_each_record(dir / shard.path, fn, shard.checksum);
  }
}

std::uint64_t count_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::uint64_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace m3pipe
