#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "m3pipe/backends.hpp"
#include "m3pipe/manifest.hpp"
#include "m3pipe/parallel.hpp"

namespace m3pipe {

// dot(u,v) / (|u|·|v|). Throws ValidationError on dimension mismatch or a
// zero-norm vector. Result clamped to [-1, 1] against rounding slack.
double cosine(std::span<const double> u, std::span<const double> v);

enum class FilterOutcomeKind { kept, rejected, errored };

std::string_view to_string(FilterOutcomeKind kind);

// One line of the <dataset>.scores file.
struct SimilarityRecord {
  std::string sample_id;
  double score = 0.0;  // meaningless when errored
  FilterOutcomeKind outcome = FilterOutcomeKind::kept;
  std::string reason;  // set for rejected/errored
};

struct FilterStats {
  std::uint64_t total = 0;
  std::uint64_t kept = 0;
  std::uint64_t rejected = 0;  // below threshold or stub caption
  std::uint64_t errored = 0;   // missing fields, zero norms, backend failures

  double filtered_fraction() const {
    return total == 0 ? 0.0
                      : static_cast<double>(total - kept) / static_cast<double>(total);
  }
};

struct FilterOptions {
  double threshold = 0.0;          // keep iff score >= threshold
  std::uint64_t min_caption_chars = 16;  // our own stub heuristic; 0 disables
  int batch_cap = 64;
  int parallelism = 1;
  ExecMode mode = ExecMode::openmp;
  std::uint64_t shard_size = 10000;
};

struct FilterResult {
  Manifest kept;
  FilterStats stats;
  std::filesystem::path scores_path;
};

// Embedding-similarity filtering of image-caption pairs. The caption is the
// concatenation of all human-turn texts joined by single spaces. Boundary
// scores equal to the threshold are kept. Every input sample lands in
// exactly one of kept/rejected/errored and in the scores file, input order.
FilterResult filter_dataset(const std::filesystem::path& manifest_path,
                            EmbeddingBackend& backend, const FilterOptions& options,
                            const std::filesystem::path& output_dir);

std::vector<SimilarityRecord> load_scores(const std::filesystem::path& path);

// First occurrence by (image_ref, concatenated turn text) content hash wins;
// input order is preserved. Sample datasets only.
Manifest dedup(const std::filesystem::path& manifest_path,
               const std::filesystem::path& output_dir, std::uint64_t shard_size);

std::string caption_of(const Sample& sample);

}  // namespace m3pipe
