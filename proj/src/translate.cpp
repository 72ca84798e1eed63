#include "m3pipe/translate.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <mutex>
#include <system_error>

#include "m3pipe/checkpoint.hpp"
#include "m3pipe/errors.hpp"
#include "m3pipe/hash.hpp"
#include "m3pipe/shard_io.hpp"

namespace m3pipe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// protect -> translate -> restore over the texts of one record, so
// placeholder conservation is checked per record.
std::vector<std::string> translate_texts(const std::vector<std::string>& texts, Lang src,
                                         Lang tgt, TranslationBackend& backend,
                                         const std::vector<std::string>& patterns) {
  std::vector<std::string> masked;
  std::vector<PlaceholderMap> maps;
  masked.reserve(texts.size());
  maps.reserve(texts.size());
  for (const std::string& t : texts) {
    auto [m, map] = protect(t, patterns);
    masked.push_back(std::move(m));
    maps.push_back(std::move(map));
  }
  std::vector<std::string> translated = backend.translate(masked, src, tgt);
  if (translated.size() != masked.size()) {
    throw ProtocolError("backend returned " + std::to_string(translated.size()) +
                        " translations for " + std::to_string(masked.size()) + " texts");
  }
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < translated.size(); ++i) {
    out.push_back(restore(translated[i], maps[i]));
  }
  return out;
}

}  // namespace

Sample translate_sample(const Sample& sample, Lang tgt, TranslationBackend& backend,
                        const std::vector<std::string>& patterns) {
  Lang src = sample.language;
  if (src == tgt) {
    throw ValidationError("sample '" + sample.id + "' is already in language " +
                          std::string(to_string(tgt)));
  }
  std::vector<std::string> texts;
  texts.reserve(sample.turns.size());
  for (const Turn& t : sample.turns) texts.push_back(t.text);
  std::vector<std::string> translated = translate_texts(texts, src, tgt, backend, patterns);

  Sample out = sample;
  out.language = tgt;
  for (std::size_t i = 0; i < out.turns.size(); ++i) out.turns[i].text = translated[i];
  out.meta["translated_from"] = std::string(to_string(src));
  return out;
}

EvalItem translate_eval_item(const EvalItem& item, Lang tgt, TranslationBackend& backend,
                             const std::vector<std::string>& patterns) {
  Lang src = item.language;
  if (src == tgt) {
    throw ValidationError("eval item '" + item.id + "' is already in language " +
                          std::string(to_string(tgt)));
  }
  std::vector<std::string> texts;
  texts.reserve(1 + item.options.size());
  texts.push_back(item.question);
  for (const std::string& o : item.options) texts.push_back(o);
  std::vector<std::string> translated = translate_texts(texts, src, tgt, backend, patterns);

  EvalItem out = item;
  out.language = tgt;
  out.question = translated[0];
  for (std::size_t i = 0; i < out.options.size(); ++i) out.options[i] = translated[i + 1];
  return out;
}

TextPair translate_text_pair(const TextPair& pair, Lang tgt, TranslationBackend& backend,
                             const std::vector<std::string>& patterns) {
  if (pair.lang_a == tgt) {
    throw ValidationError("text pair '" + pair.id + "' already has a-side language " +
                          std::string(to_string(tgt)));
  }
  std::vector<std::string> translated =
      translate_texts({pair.text_a}, pair.lang_a, tgt, backend, patterns);
  TextPair out = pair;
  out.lang_b = tgt;
  out.text_b = translated[0];
  return out;
}

Record translate_record(const Record& record, Lang tgt, TranslationBackend& backend,
                        const std::vector<std::string>& patterns) {
  if (const Sample* s = std::get_if<Sample>(&record)) {
    return translate_sample(*s, tgt, backend, patterns);
  }
  if (const TextPair* p = std::get_if<TextPair>(&record)) {
    return translate_text_pair(*p, tgt, backend, patterns);
  }
  return translate_eval_item(std::get<EvalItem>(record), tgt, backend, patterns);
}

std::string deadletter_name(const std::string& dataset, Lang lang) {
  return dataset + "." + std::string(to_string(lang)) + ".deadletter";
}

namespace {

std::string shard_file_name(const std::string& dataset, Lang lang, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d", index);
  return dataset + "." + std::string(to_string(lang)) + ".shard-" + buf + ".jsonl";
}

std::string deadletter_part_name(const std::string& dataset, Lang lang, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d", index);
  return dataset + "." + std::string(to_string(lang)) + ".deadletter.part-" + buf + ".jsonl";
}

// A record reduced to a dead letter: the original record with the failure
// written into meta (samples) or wrapped as-is for pairs/items, so the
// dead-letter shard is itself a readable record shard.
Record to_dead_letter(const Record& record, Lang tgt, const std::string& error) {
  Record out = record;
  if (Sample* s = std::get_if<Sample>(&out)) {
    s->meta["error"] = error;
    s->meta["error_target_language"] = std::string(to_string(tgt));
  }
  return out;
}

void validate_job_config(const TranslationJob::Config& config) {
  if (!config.backend) throw ValidationError("translation job has no backend");
  if (config.targets.empty()) throw ValidationError("translation job has no target languages");
  for (Lang t : config.targets) {
    if (t == Lang::en) throw ValidationError("'en' cannot be a translation target");
  }
  if (config.parallelism < 1) throw ValidationError("parallelism must be >= 1");
  if (config.output_dir.empty()) throw ValidationError("translation job needs an output dir");
  if (config.checkpoint_dir.empty()) throw ValidationError("translation job needs a checkpoint dir");
}

void remove_stale_temps(const fs::path& dir) {
  if (!fs::exists(dir)) return;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".tmp") {
      std::error_code ec;
      fs::remove(entry.path(), ec);
    }
  }
}

bool shard_outputs_exist(const fs::path& dir, const std::string& dataset,
                         const std::vector<Lang>& targets, int shard_index) {
  for (Lang lang : targets) {
    if (!fs::exists(dir / shard_file_name(dataset, lang, shard_index))) return false;
  }
  return true;
}

}  // namespace

std::string TranslationJob::config_hash(const Config& config) {
  json j{{"source_manifest_sha256", sha256_file_hex(config.source_manifest.string())},
         {"backend", config.backend ? config.backend->describe() : std::string()},
         {"patterns", config.placeholder_patterns},
         {"output_dir", config.output_dir.string()}};
  json targets = json::array();
  for (Lang t : config.targets) targets.push_back(std::string(to_string(t)));
  j["targets"] = std::move(targets);
  return sha256_hex(j.dump());
}

TranslationJob::Result TranslationJob::run(const Config& config, const Hooks& hooks) {
  validate_job_config(config);
  Manifest source = load_manifest(config.source_manifest);
  const fs::path source_dir = config.source_manifest.parent_path();
  const std::string& dataset = source.dataset_name;
  const int shard_count = static_cast<int>(source.shards.size());

  Result result;
  result.config_hash = config_hash(config);
  const std::string job_id = dataset + ".translate";

  CheckpointState ckpt;
  bool resumed = load_checkpoint(config.checkpoint_dir, job_id, result.config_hash, ckpt);
  if (!resumed) {
    ckpt.job_id = job_id;
    ckpt.config_hash = result.config_hash;
  }

  // No-op fast path: everything already done and published.
  auto all_manifests_exist = [&] {
    for (Lang lang : config.targets) {
      Manifest probe;
      probe.dataset_name = dataset;
      probe.language = lang;
      if (!fs::exists(config.output_dir / probe.file_name())) return false;
    }
    return true;
  };
  if (resumed && static_cast<int>(ckpt.completed_shards.size()) == shard_count &&
      all_manifests_exist()) {
    for (Lang lang : config.targets) {
      Manifest probe;
      probe.dataset_name = dataset;
      probe.language = lang;
      Manifest m = load_manifest(config.output_dir / probe.file_name());
      result.translated[lang] = m.total_count;
      fs::path dl = config.output_dir / deadletter_name(dataset, lang);
      result.dead_letters[lang] = fs::exists(dl) ? count_lines(dl) : 0;
      result.manifests[lang] = std::move(m);
    }
    result.completed = true;
    return result;
  }

  // Fail fast on an unreachable backend before any work is scheduled.
  config.backend->translate({"ping"}, Lang::en, config.targets.front());

  fs::create_directories(config.output_dir);
  remove_stale_temps(config.output_dir);

  std::vector<int> pending;
  for (int i = 0; i < shard_count; ++i) {
    if (ckpt.completed_shards.count(i) != 0 &&
        shard_outputs_exist(config.output_dir, dataset, config.targets, i)) {
      continue;
    }
    ckpt.completed_shards.erase(i);
    pending.push_back(i);
  }

  std::mutex checkpoint_mutex;
  std::atomic<bool> local_cancel{false};
  std::atomic<bool>* cancel = hooks.cancel ? hooks.cancel.get() : &local_cancel;
  std::atomic<int> processed{0};

  auto process_shard = [&](std::size_t pending_idx) {
    int shard_index = pending[pending_idx];
    if (cancel->load()) return;
    const ShardEntry& shard = source.shards[static_cast<std::size_t>(shard_index)];

    struct LangOutput {
      Lang lang;
      fs::path final_path;
      fs::path dl_final_path;
      std::unique_ptr<ShardWriter> writer;
      std::unique_ptr<ShardWriter> dl_writer;
      std::uint64_t dl_count = 0;
    };
    std::vector<LangOutput> outputs;
    for (Lang lang : config.targets) {
      LangOutput o;
      o.lang = lang;
      o.final_path = config.output_dir / shard_file_name(dataset, lang, shard_index);
      o.dl_final_path = config.output_dir / deadletter_part_name(dataset, lang, shard_index);
      fs::path tmp = o.final_path;
      tmp += ".tmp";
      o.writer = std::make_unique<ShardWriter>(tmp);
      fs::path dl_tmp = o.dl_final_path;
      dl_tmp += ".tmp";
      o.dl_writer = std::make_unique<ShardWriter>(dl_tmp);
      outputs.push_back(std::move(o));
    }

    ShardReader reader(source_dir / shard.path, shard.checksum);
    while (auto rec = reader.next()) {
      if (cancel->load()) return;  // abandon mid-shard, temps stay behind
      for (LangOutput& o : outputs) {
        try {
          o.writer->add(translate_record(*rec, o.lang, *config.backend,
                                         config.placeholder_patterns));
        } catch (const ValidationError& e) {
          o.dl_writer->add(to_dead_letter(*rec, o.lang, e.what()));
          ++o.dl_count;
        } catch (const ProtocolError& e) {
          o.dl_writer->add(to_dead_letter(*rec, o.lang, e.what()));
          ++o.dl_count;
        }
        // TransportError propagates: an unreachable backend aborts the job.
      }
    }
    if (cancel->load()) return;

    for (LangOutput& o : outputs) {
      fs::path tmp = o.final_path;
      tmp += ".tmp";
      o.writer->finish();
      fs::rename(tmp, o.final_path);
      fs::path dl_tmp = o.dl_final_path;
      dl_tmp += ".tmp";
      if (o.dl_count > 0) {
        o.dl_writer->finish();
        fs::rename(dl_tmp, o.dl_final_path);
      } else {
        o.dl_writer->discard();
        // a crashed earlier attempt may have published a part for this shard
        std::error_code ec;
        fs::remove(o.dl_final_path, ec);
      }
    }

    {
      std::lock_guard<std::mutex> lock(checkpoint_mutex);
      ckpt.completed_shards.insert(shard_index);
      ckpt.timestamp = static_cast<std::int64_t>(::time(nullptr));
      save_checkpoint(ckpt, config.checkpoint_dir);
    }
    processed.fetch_add(1);
    if (hooks.after_shard) hooks.after_shard(shard_index);
  };

  for_each_index(config.mode, pending.size(), config.parallelism, process_shard);
  result.shards_processed_this_run = processed.load();

  if (cancel->load()) {
    result.completed = false;
    return result;
  }
  if (static_cast<int>(ckpt.completed_shards.size()) != shard_count) {
    throw Error("translation job finished with incomplete shards");
  }
  if (shard_count == 0) {
    // Still record completion so re-runs are no-ops.
    ckpt.timestamp = static_cast<std::int64_t>(::time(nullptr));
    save_checkpoint(ckpt, config.checkpoint_dir);
  }

  // Publish: merge dead-letter parts in shard order, then rebuild manifests
  // by scanning the final shard files. Both steps are deterministic and
  // idempotent, so a crash here is repaired by re-running.
  for (Lang lang : config.targets) {
    fs::path dl_path = config.output_dir / deadletter_name(dataset, lang);
    fs::path dl_tmp = dl_path;
    dl_tmp += ".tmp";
    std::uint64_t dl_total = 0;
    {
      std::ofstream merged(dl_tmp, std::ios::binary | std::ios::trunc);
      for (int i = 0; i < shard_count; ++i) {
        fs::path part = config.output_dir / deadletter_part_name(dataset, lang, i);
        if (!fs::exists(part)) continue;
        std::ifstream in(part, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
          merged << line << '\n';
          ++dl_total;
        }
      }
    }
    if (dl_total > 0) {
      fs::rename(dl_tmp, dl_path);
    } else {
      std::error_code ec;
      fs::remove(dl_tmp, ec);
      fs::remove(dl_path, ec);
    }
    result.dead_letters[lang] = dl_total;

    Manifest out;
    out.dataset_name = dataset;
    out.language = lang;
    out.record_type = source.record_type;
    for (int i = 0; i < shard_count; ++i) {
      std::string name = shard_file_name(dataset, lang, i);
      fs::path path = config.output_dir / name;
      out.shards.push_back(
          ShardEntry{name, count_lines(path), sha256_file_hex(path.string())});
      out.total_count += out.shards.back().sample_count;
    }
    save_manifest(out, config.output_dir);
    result.translated[lang] = out.total_count;
    result.manifests[lang] = std::move(out);
  }

  result.completed = true;
  return result;
}

}  // namespace m3pipe
