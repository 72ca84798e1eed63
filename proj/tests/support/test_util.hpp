#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "m3pipe/hash.hpp"
#include "m3pipe/manifest.hpp"
#include "m3pipe/records.hpp"
#include "m3pipe/shard_io.hpp"

namespace m3pipe::test {

// Self-cleaning unique temp directory.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("m3pipe-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Sample make_sample(const std::string& id, const std::string& human_text,
                          const std::string& assistant_text = "", Lang lang = Lang::en) {
  Sample s;
  s.id = id;
  s.language = lang;
  s.image_ref = "images/" + id + ".jpg";
  s.turns.push_back(Turn{Role::human, human_text});
  if (!assistant_text.empty()) s.turns.push_back(Turn{Role::assistant, assistant_text});
  s.source_dataset = "fixture";
  return s;
}

inline EvalItem make_item(const std::string& id, const std::string& question,
                          std::vector<std::string> options, int answer,
                          Lang lang = Lang::en) {
  EvalItem e;
  e.id = id;
  e.subject = "fixture";
  e.question = question;
  e.options = std::move(options);
  e.answer_index = answer;
  e.image_refs = {"images/" + id + ".png"};
  e.language = lang;
  return e;
}

inline Manifest write_dataset(const std::filesystem::path& dir, const std::string& name,
                              Lang lang, RecordType type, const std::vector<Record>& records,
                              std::uint64_t shard_size = 10000) {
  DatasetWriter writer(dir, name, lang, type, shard_size);
  for (const Record& r : records) writer.add(r);
  return writer.finish();
}

inline std::vector<Record> read_all(const std::filesystem::path& manifest_path) {
  std::vector<Record> records;
  for_each_manifest_record(manifest_path, [&](Record&& r) { records.push_back(std::move(r)); });
  return records;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Digest of every output file under a directory, keyed by relative path.
// Run summaries carry timings and are excluded.
inline std::string tree_digest(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename().string().rfind("run-summary", 0) == 0) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::string combined;
  for (const auto& f : files) {
    combined += std::filesystem::relative(f, dir).string();
    combined += ":";
    combined += sha256_file_hex(f.string());
    combined += "\n";
  }
  return sha256_hex(combined);
}

// Deterministic text generator mixing ASCII, punctuation, CJK, Cyrillic,
// Arabic, and image tokens. Never emits the sentinel prefix.
class TextGen {
 public:
  explicit TextGen(std::uint64_t seed) : rng_(seed) {}

  std::string word() {
    static const std::vector<std::string> kAtoms = {
        "river",  "Mountain", "paint",   "circuit", "molecule", "harvest",
        "libro",  "9th",      "alpha,",  "beta!",   "中文",
        "мир", "عربي", "(note)", "x=42",
        "café", "Über"};
    return kAtoms[rng_.next() % kAtoms.size()];
  }

  std::string sentence(int min_words = 3, int max_words = 12, bool with_image_token = false) {
    int n = min_words + static_cast<int>(rng_.next() % (max_words - min_words + 1));
    std::string out;
    if (with_image_token) out += "<image>\n";
    for (int i = 0; i < n; ++i) {
      if (i > 0) out.push_back(' ');
      out += word();
    }
    return out;
  }

  std::uint64_t next() { return rng_.next(); }

 private:
  SplitMix64 rng_;
};

}  // namespace m3pipe::test
