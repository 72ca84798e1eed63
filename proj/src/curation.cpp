#include "m3pipe/curation.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include "m3pipe/errors.hpp"
#include "m3pipe/hash.hpp"
#include "m3pipe/shard_io.hpp"
#include "m3pipe/utf8.hpp"

namespace m3pipe {

namespace fs = std::filesystem;
using nlohmann::json;

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ValidationError("cosine requires equal dimensions, got " + std::to_string(u.size()) +
                          " and " + std::to_string(v.size()));
  }
  if (u.empty()) throw ValidationError("cosine requires non-empty vectors");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw ValidationError("cosine of a zero-norm vector is undefined");
  double value = dot / (std::sqrt(nu) * std::sqrt(nv));
  if (value > 1.0) value = 1.0;
  if (value < -1.0) value = -1.0;
  return value;
}

std::string_view to_string(FilterOutcomeKind kind) {
  switch (kind) {
    case FilterOutcomeKind::kept: return "kept";
    case FilterOutcomeKind::rejected: return "rejected";
    case FilterOutcomeKind::errored: return "errored";
  }
  return "kept";
}

std::string caption_of(const Sample& sample) {
  std::string caption;
  for (const Turn& t : sample.turns) {
    if (t.role != Role::human || t.text.empty()) continue;
    if (!caption.empty()) caption.push_back(' ');
    caption += t.text;
  }
  return caption;
}

namespace {

struct PendingSample {
  Sample sample;
  std::string caption;
  // slot in the shard's embedding request list, or -1 when pre-errored
  long embed_slot = -1;
  SimilarityRecord record;
};

void write_score_line(std::ofstream& out, const SimilarityRecord& rec) {
  json j{{"sample_id", rec.sample_id}, {"outcome", std::string(to_string(rec.outcome))}};
  if (rec.outcome != FilterOutcomeKind::errored) j["score"] = rec.score;
  if (!rec.reason.empty()) j["reason"] = rec.reason;
  out << j.dump() << '\n';
}

}  // namespace

FilterResult filter_dataset(const fs::path& manifest_path, EmbeddingBackend& backend,
                            const FilterOptions& options, const fs::path& output_dir) {
  Manifest source = load_manifest(manifest_path);
  if (source.record_type != RecordType::sample) {
    throw ValidationError("similarity filtering applies to sample datasets only");
  }
  fs::create_directories(output_dir);

  FilterResult result;
  result.scores_path = output_dir / (source.dataset_name + ".scores");
  std::ofstream scores(result.scores_path, std::ios::binary | std::ios::trunc);
  if (!scores) throw ValidationError("cannot write " + result.scores_path.string());

  DatasetWriter writer(output_dir, source.dataset_name, source.language, RecordType::sample,
                       options.shard_size);
  const fs::path source_dir = manifest_path.parent_path();

  for (const ShardEntry& shard : source.shards) {
    std::vector<PendingSample> pending;
    pending.reserve(shard.sample_count);
    for_each_record(
        source_dir / shard.path,
        [&](Record&& rec) {
          PendingSample p;
          p.sample = std::get<Sample>(std::move(rec));
          p.record.sample_id = p.sample.id;
          p.caption = caption_of(p.sample);
          if (!p.sample.image_ref || p.sample.image_ref->empty()) {
            p.record.outcome = FilterOutcomeKind::errored;
            p.record.reason = "missing image_ref";
          } else if (p.caption.empty()) {
            p.record.outcome = FilterOutcomeKind::errored;
            p.record.reason = "no human caption text";
          } else if (options.min_caption_chars > 0 &&
                     utf8_length(p.caption) < options.min_caption_chars) {
            p.record.outcome = FilterOutcomeKind::rejected;
            p.record.reason = "stub caption shorter than " +
                              std::to_string(options.min_caption_chars) + " characters";
          }
          pending.push_back(std::move(p));
        },
        shard.checksum);

    // Batch the eligible samples; caption and image go to the backend as
    // separate requests of the matching kind.
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (pending[i].record.reason.empty()) {
        pending[i].embed_slot = static_cast<long>(eligible.size());
        eligible.push_back(i);
      }
    }
    std::size_t cap = options.batch_cap < 1 ? 1 : static_cast<std::size_t>(options.batch_cap);
    std::size_t batch_count = (eligible.size() + cap - 1) / cap;
    std::vector<std::vector<std::vector<double>>> caption_vecs(batch_count);
    std::vector<std::vector<std::vector<double>>> image_vecs(batch_count);
    std::vector<std::string> batch_errors(batch_count);
    for_each_index(options.mode, batch_count, options.parallelism, [&](std::size_t b) {
      std::size_t begin = b * cap;
      std::size_t end = std::min(eligible.size(), begin + cap);
      std::vector<std::string> captions, images;
      for (std::size_t k = begin; k < end; ++k) {
        captions.push_back(pending[eligible[k]].caption);
        images.push_back(*pending[eligible[k]].sample.image_ref);
      }
      try {
        caption_vecs[b] = backend.embed(captions, EmbedKind::text);
        image_vecs[b] = backend.embed(images, EmbedKind::image);
        if (caption_vecs[b].size() != captions.size() || image_vecs[b].size() != images.size()) {
          throw ProtocolError("embedding backend returned a short batch");
        }
      } catch (const TransportError& e) {
        batch_errors[b] = e.what();
      } catch (const ProtocolError& e) {
        batch_errors[b] = e.what();
      }
    });

    // Deterministic fold in input order.
    for (std::size_t i = 0; i < pending.size(); ++i) {
      PendingSample& p = pending[i];
      ++result.stats.total;
      if (p.embed_slot >= 0) {
        std::size_t slot = static_cast<std::size_t>(p.embed_slot);
        std::size_t b = slot / cap;
        std::size_t off = slot % cap;
        if (!batch_errors[b].empty()) {
          p.record.outcome = FilterOutcomeKind::errored;
          p.record.reason = batch_errors[b];
        } else {
          try {
            p.record.score = cosine(caption_vecs[b][off], image_vecs[b][off]);
            p.record.outcome = p.record.score >= options.threshold
                                   ? FilterOutcomeKind::kept
                                   : FilterOutcomeKind::rejected;
            if (p.record.outcome == FilterOutcomeKind::rejected) {
              p.record.reason = "similarity below threshold";
            }
          } catch (const ValidationError& e) {
            p.record.outcome = FilterOutcomeKind::errored;
            p.record.reason = e.what();
          }
        }
      }
      switch (p.record.outcome) {
        case FilterOutcomeKind::kept:
          ++result.stats.kept;
          writer.add(Record(std::move(p.sample)));
          break;
        case FilterOutcomeKind::rejected:
          ++result.stats.rejected;
          break;
        case FilterOutcomeKind::errored:
          ++result.stats.errored;
          break;
      }
      write_score_line(scores, p.record);
    }
  }
  if (!scores) throw Error("I/O failure writing " + result.scores_path.string());
  scores.close();
  result.kept = writer.finish();
  return result;
}

std::vector<SimilarityRecord> load_scores(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scores file " + path.string());
  std::vector<SimilarityRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    json j = json::parse(line);
    SimilarityRecord rec;
    rec.sample_id = j.at("sample_id").get<std::string>();
    rec.score = j.value("score", 0.0);
    std::string outcome = j.at("outcome").get<std::string>();
    rec.outcome = outcome == "kept"       ? FilterOutcomeKind::kept
                  : outcome == "rejected" ? FilterOutcomeKind::rejected
                                          : FilterOutcomeKind::errored;
    rec.reason = j.value("reason", std::string());
    out.push_back(std::move(rec));
  }
  return out;
}

Manifest dedup(const fs::path& manifest_path, const fs::path& output_dir,
               std::uint64_t shard_size) {
  Manifest source = load_manifest(manifest_path);
  if (source.record_type != RecordType::sample) {
    throw ValidationError("dedup applies to sample datasets only");
  }
  DatasetWriter writer(output_dir, source.dataset_name, source.language, RecordType::sample,
                       shard_size);
  std::unordered_set<std::string> seen;
  const fs::path source_dir = manifest_path.parent_path();
  for (const ShardEntry& shard : source.shards) {
    for_each_record(
        source_dir / shard.path,
        [&](Record&& rec) {
          const Sample& s = std::get<Sample>(rec);
          std::string content = s.image_ref.value_or("");
          content.push_back('\x1e');
          for (const Turn& t : s.turns) {
            content += t.text;
            content.push_back('\x1f');
          }
          if (seen.insert(sha256_hex(content)).second) writer.add(rec);
        },
        shard.checksum);
  }
  return writer.finish();
}

}  // namespace m3pipe
