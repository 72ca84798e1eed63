#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>

#include "m3pipe/backends.hpp"
#include "m3pipe/manifest.hpp"
#include "m3pipe/parallel.hpp"
#include "m3pipe/placeholder.hpp"
#include "m3pipe/records.hpp"

namespace m3pipe {

// Translates every turn through protect -> backend -> restore. The sample's
// id, image_ref, roles, turn count and source_dataset are untouched; language
// becomes tgt and meta gains translated_from=<src>. The source language is
// the sample's own language; src == tgt is an error.
Sample translate_sample(const Sample& sample, Lang tgt, TranslationBackend& backend,
                        const std::vector<std::string>& patterns);

// Question and options are translated; id, subject, image_refs, option count
// and answer_index are preserved.
EvalItem translate_eval_item(const EvalItem& item, Lang tgt, TranslationBackend& backend,
                             const std::vector<std::string>& patterns);

// Re-targets the pair from its a-side: text_b becomes the translation of
// text_a into tgt. Requires lang_a != tgt.
TextPair translate_text_pair(const TextPair& pair, Lang tgt, TranslationBackend& backend,
                             const std::vector<std::string>& patterns);

Record translate_record(const Record& record, Lang tgt, TranslationBackend& backend,
                        const std::vector<std::string>& patterns);

class TranslationJob {
 public:
  struct Config {
    std::filesystem::path source_manifest;
    std::vector<Lang> targets;
    std::shared_ptr<TranslationBackend> backend;
    std::vector<std::string> placeholder_patterns = default_placeholder_patterns();
    int parallelism = 1;
    ExecMode mode = ExecMode::openmp;
    std::filesystem::path checkpoint_dir;
    std::filesystem::path output_dir;
  };

  // Test hooks. after_shard fires once per completed shard (after its
  // checkpoint update); raising `cancel` makes workers abandon in-flight
  // shards immediately, leaving their temp files behind like a hard kill.
  struct Hooks {
    std::function<void(int)> after_shard;
    std::shared_ptr<std::atomic<bool>> cancel;
  };

  struct Result {
    bool completed = false;
    std::string config_hash;
    std::map<Lang, Manifest> manifests;           // filled when completed
    std::map<Lang, std::uint64_t> translated;     // per-language output counts
    std::map<Lang, std::uint64_t> dead_letters;   // per-language dead-letter counts
    int shards_processed_this_run = 0;
  };

  // Resumable, per-shard checkpointed run. Output bytes are independent of
  // parallelism, execution mode, and interruption points. Re-running a
  // completed job is a no-op.
  static Result run(const Config& config, const Hooks& hooks = {});

  // The 64-hex digest binding checkpoints to this job: covers the source
  // manifest bytes, targets, backend identity, patterns, and output dir.
  // Parallelism is excluded because outputs do not depend on it.
  static std::string config_hash(const Config& config);
};

// Name of the dead-letter shard for a dataset/language, e.g.
// "llava.zh.deadletter". Dead letters are valid sample/record lines whose
// meta records the failure.
std::string deadletter_name(const std::string& dataset, Lang lang);

}  // namespace m3pipe
