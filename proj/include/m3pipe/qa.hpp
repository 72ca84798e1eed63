#pragma once

#include <filesystem>
#include <map>
#include <optional>

#include "m3pipe/backends.hpp"
#include "m3pipe/eval.hpp"
#include "m3pipe/manifest.hpp"
#include "m3pipe/parallel.hpp"
#include "m3pipe/placeholder.hpp"

namespace m3pipe {

// Character n-gram F-score, orders 1..6 averaged, beta = 2. Operates on
// Unicode codepoints as-is (no whitespace stripping). Precision and recall
// are averaged across orders first; orders empty on both sides are skipped.
// Both strings empty -> 1.0; exactly one empty -> 0.0. Not symmetric.
double chrf(const std::string& reference, const std::string& hypothesis);

struct RoundTripOptions {
  std::vector<std::string> patterns = default_placeholder_patterns();
  int parallelism = 1;
  ExecMode mode = ExecMode::openmp;
  std::uint64_t shard_size = 10000;
};

struct RoundTripOutcome {
  Manifest manifest;  // the back-translated dataset, language en
  double mean_chrf = 1.0;
  std::uint64_t records = 0;
  std::uint64_t dead_letters = 0;
  std::uint64_t structure_violations = 0;  // eval items with altered options/answer
};

// translate(en -> tgt) composed with translate(tgt -> en) over a full
// dataset. The output manifest is named "<dataset>.bt-<tgt>". mean_chrf is
// the mean per-record chrF between original and round-tripped texts.
RoundTripOutcome round_trip_dataset(const std::filesystem::path& manifest_path, Lang tgt,
                                    TranslationBackend& backend, const RoundTripOptions& options,
                                    const std::filesystem::path& out_dir);

struct QaRow {
  std::string label;  // language code, or "average"
  double accuracy_original = 0.0;
  double accuracy_backtranslated = 0.0;
  double delta = 0.0;  // accuracy_original - accuracy_backtranslated
  std::optional<double> chrf_roundtrip;
  bool flagged = false;
};

struct QaReport {
  std::vector<QaRow> per_language;
  QaRow average;  // BT accuracy averaged over pivot languages
  double flag_threshold = 2.0;
};

// Compares an English eval run against runs on back-translated variants,
// one per pivot language. Both sides must cover the same item ids. A row is
// flagged iff |delta| > flag_threshold. Deltas are always recomputed from
// the per-item outcomes.
QaReport build_report(const EvalRun& original, const std::map<Lang, EvalRun>& backtranslated,
                      double flag_threshold,
                      const std::map<Lang, double>& chrf_by_pivot = {});

std::string render_qa_report(const QaReport& report);

// Side-by-side QA summary for several models:
// | Model | E-MMMU | BT-MMMU | Delta | Verdict |
std::string render_qa_table(const std::vector<std::pair<std::string, QaReport>>& reports);

}  // namespace m3pipe
