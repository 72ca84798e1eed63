#include "m3pipe/qa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

#include "m3pipe/errors.hpp"
#include "m3pipe/shard_io.hpp"
#include "m3pipe/translate.hpp"
#include "m3pipe/utf8.hpp"

namespace m3pipe {

namespace fs = std::filesystem;

namespace {

constexpr int kMaxOrder = 6;
constexpr double kBeta = 2.0;

// Counts of codepoint n-grams for one order. Keys are the raw codepoints
// packed into a string of char32_t to avoid re-encoding.
using NgramCounts = std::unordered_map<std::u32string, std::uint64_t>;

NgramCounts ngram_counts(const std::vector<char32_t>& cps, int order) {
  NgramCounts counts;
  if (static_cast<int>(cps.size()) < order) return counts;
  for (std::size_t i = 0; i + order <= cps.size(); ++i) {
    counts[std::u32string(cps.begin() + i, cps.begin() + i + order)]++;
  }
  return counts;
}

}  // namespace

double chrf(const std::string& reference, const std::string& hypothesis) {
  if (reference.empty() && hypothesis.empty()) return 1.0;
  if (reference.empty() || hypothesis.empty()) return 0.0;
  std::vector<char32_t> ref = utf8_codepoints(reference);
  std::vector<char32_t> hyp = utf8_codepoints(hypothesis);

  double precision_sum = 0.0, recall_sum = 0.0;
  int counted_orders = 0;
  for (int order = 1; order <= kMaxOrder; ++order) {
    std::uint64_t ref_total = ref.size() >= static_cast<std::size_t>(order)
                                  ? ref.size() - order + 1
                                  : 0;
    std::uint64_t hyp_total = hyp.size() >= static_cast<std::size_t>(order)
                                  ? hyp.size() - order + 1
                                  : 0;
    if (ref_total == 0 && hyp_total == 0) continue;
    ++counted_orders;
    if (ref_total == 0 || hyp_total == 0) continue;  // precision/recall 0 for this order
    NgramCounts ref_counts = ngram_counts(ref, order);
    NgramCounts hyp_counts = ngram_counts(hyp, order);
    std::uint64_t matched = 0;
    for (const auto& [gram, count] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    precision_sum += static_cast<double>(matched) / static_cast<double>(hyp_total);
    recall_sum += static_cast<double>(matched) / static_cast<double>(ref_total);
  }
  if (counted_orders == 0) return 1.0;
  double precision = precision_sum / counted_orders;
  double recall = recall_sum / counted_orders;
  double denom = kBeta * kBeta * precision + recall;
  if (denom == 0.0) return 0.0;
  return (1.0 + kBeta * kBeta) * precision * recall / denom;
}

namespace {

std::vector<std::string> record_texts(const Record& record) {
  if (const Sample* s = std::get_if<Sample>(&record)) {
    std::vector<std::string> out;
    for (const Turn& t : s->turns) out.push_back(t.text);
    return out;
  }
  if (const TextPair* p = std::get_if<TextPair>(&record)) {
    return {p->text_a, p->text_b};
  }
  const EvalItem& e = std::get<EvalItem>(record);
  std::vector<std::string> out{e.question};
  for (const std::string& o : e.options) out.push_back(o);
  return out;
}

double record_chrf(const Record& original, const Record& round_tripped) {
  std::vector<std::string> a = record_texts(original);
  std::vector<std::string> b = record_texts(round_tripped);
  if (a.empty() || a.size() != b.size()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += chrf(a[i], b[i]);
  return sum / static_cast<double>(a.size());
}

bool structure_preserved(const Record& original, const Record& round_tripped) {
  const EvalItem* a = std::get_if<EvalItem>(&original);
  const EvalItem* b = std::get_if<EvalItem>(&round_tripped);
  if (a == nullptr || b == nullptr) return true;
  return a->options.size() == b->options.size() && a->answer_index == b->answer_index &&
         a->id == b->id;
}

}  // namespace

RoundTripOutcome round_trip_dataset(const fs::path& manifest_path, Lang tgt,
                                    TranslationBackend& backend, const RoundTripOptions& options,
                                    const fs::path& out_dir) {
  Manifest source = load_manifest(manifest_path);
  if (source.language != Lang::en) {
    throw ValidationError("round trip requires an English source dataset, got language " +
                          std::string(to_string(source.language)));
  }
  if (source.record_type == RecordType::text_pair || source.record_type == RecordType::mixed) {
    throw ValidationError("round trip supports sample and eval_item datasets only");
  }
  if (tgt == Lang::en) throw ValidationError("round trip pivot language cannot be en");

  RoundTripOutcome outcome;
  DatasetWriter writer(out_dir,
                       source.dataset_name + ".bt-" + std::string(to_string(tgt)), Lang::en,
                       source.record_type, options.shard_size);

  const fs::path source_dir = manifest_path.parent_path();
  double chrf_sum = 0.0;
  for (const ShardEntry& shard : source.shards) {
    // One shard in memory at a time; records round-trip in parallel, results
    // land in per-index slots and are folded in input order.
    std::vector<Record> records;
    records.reserve(shard.sample_count);
    for_each_record(
        source_dir / shard.path, [&](Record&& rec) { records.push_back(std::move(rec)); },
        shard.checksum);

    std::vector<std::optional<Record>> round_tripped(records.size());
    std::vector<std::string> errors(records.size());
    for_each_index(options.mode, records.size(), options.parallelism, [&](std::size_t i) {
      try {
        Record forward = translate_record(records[i], tgt, backend, options.patterns);
        round_tripped[i] = translate_record(forward, Lang::en, backend, options.patterns);
      } catch (const ValidationError& e) {
        errors[i] = e.what();
      } catch (const ProtocolError& e) {
        errors[i] = e.what();
      }
    });

    for (std::size_t i = 0; i < records.size(); ++i) {
      ++outcome.records;
      if (!round_tripped[i]) {
        ++outcome.dead_letters;
        continue;
      }
      if (!structure_preserved(records[i], *round_tripped[i])) ++outcome.structure_violations;
      chrf_sum += record_chrf(records[i], *round_tripped[i]);
      writer.add(*round_tripped[i]);
    }
  }
  std::uint64_t survived = outcome.records - outcome.dead_letters;
  outcome.mean_chrf = survived == 0 ? 1.0 : chrf_sum / static_cast<double>(survived);
  outcome.manifest = writer.finish();
  return outcome;
}

namespace {

std::set<std::string> item_ids(const EvalRun& run) {
  std::set<std::string> ids;
  for (const ItemOutcome& o : run.items) ids.insert(o.item_id);
  return ids;
}

void require_same_items(const EvalRun& original, const EvalRun& bt, Lang pivot) {
  std::set<std::string> a = item_ids(original);
  std::set<std::string> b = item_ids(bt);
  if (a == b) return;
  std::string msg = "item sets differ for pivot " + std::string(to_string(pivot)) + ":";
  int listed = 0;
  for (const std::string& id : a) {
    if (b.count(id) == 0 && listed < 5) {
      msg += " missing-from-bt:" + id;
      ++listed;
    }
  }
  for (const std::string& id : b) {
    if (a.count(id) == 0 && listed < 10) {
      msg += " extra-in-bt:" + id;
      ++listed;
    }
  }
  throw ValidationError(msg);
}

double run_accuracy(const EvalRun& run) {
  std::uint64_t correct = 0;
  for (const ItemOutcome& o : run.items) {
    if (o.correct) ++correct;
  }
  return run.items.empty() ? 0.0
                           : 100.0 * static_cast<double>(correct) /
                                 static_cast<double>(run.items.size());
}

std::string format_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

QaReport build_report(const EvalRun& original, const std::map<Lang, EvalRun>& backtranslated,
                      double flag_threshold, const std::map<Lang, double>& chrf_by_pivot) {
  if (backtranslated.empty()) {
    throw ValidationError("QA report needs at least one back-translated run");
  }
  QaReport report;
  report.flag_threshold = flag_threshold;
  double acc_original = run_accuracy(original);

  double bt_sum = 0.0;
  double chrf_sum = 0.0;
  bool chrf_complete = true;
  for (const auto& [pivot, run] : backtranslated) {
    require_same_items(original, run, pivot);
    QaRow row;
    row.label = std::string(to_string(pivot));
    row.accuracy_original = acc_original;
    row.accuracy_backtranslated = run_accuracy(run);
    row.delta = row.accuracy_original - row.accuracy_backtranslated;
    row.flagged = std::fabs(row.delta) > flag_threshold;
    if (auto it = chrf_by_pivot.find(pivot); it != chrf_by_pivot.end()) {
      row.chrf_roundtrip = it->second;
      chrf_sum += it->second;
    } else {
      chrf_complete = false;
    }
    bt_sum += row.accuracy_backtranslated;
    report.per_language.push_back(std::move(row));
  }

  report.average.label = "average";
  report.average.accuracy_original = acc_original;
  report.average.accuracy_backtranslated = bt_sum / static_cast<double>(backtranslated.size());
  report.average.delta = acc_original - report.average.accuracy_backtranslated;
  report.average.flagged = std::fabs(report.average.delta) > flag_threshold;
  if (chrf_complete) {
    report.average.chrf_roundtrip = chrf_sum / static_cast<double>(backtranslated.size());
  }
  return report;
}

namespace {

std::string qa_row_line(const QaRow& row) {
  std::string chrf_cell = row.chrf_roundtrip ? format_pct(*row.chrf_roundtrip * 100.0) : "-";
  return "| " + row.label + " | " + format_pct(row.accuracy_original) + " | " +
         format_pct(row.accuracy_backtranslated) + " | " + format_pct(row.delta) + " | " +
         chrf_cell + " | " + (row.flagged ? "flagged" : "consistent") + " |\n";
}

}  // namespace

std::string render_qa_report(const QaReport& report) {
  std::string out =
      "| Language | E-Acc | BT-Acc | Delta | chrF | Verdict |\n|---|---|---|---|---|---|\n";
  for (const QaRow& row : report.per_language) out += qa_row_line(row);
  out += qa_row_line(report.average);
  out += "\nflag threshold: " + format_pct(report.flag_threshold) + " percentage points; ";
  out += "chrF is a supplementary text-level signal (percent of 1.0).\n";
  return out;
}

std::string render_qa_table(const std::vector<std::pair<std::string, QaReport>>& reports) {
  std::string out = "| Model | E-MMMU | BT-MMMU | Delta | Verdict |\n|---|---|---|---|---|\n";
  for (const auto& [label, report] : reports) {
    const QaRow& avg = report.average;
    out += "| " + label + " | " + format_pct(avg.accuracy_original) + " | " +
           format_pct(avg.accuracy_backtranslated) + " | " + format_pct(avg.delta) + " | " +
           (avg.flagged ? "flagged" : "consistent") + " |\n";
  }
  return out;
}

}  // namespace m3pipe
