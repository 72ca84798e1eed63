#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "m3pipe/backends.hpp"
#include "m3pipe/parallel.hpp"
#include "m3pipe/records.hpp"

namespace m3pipe {

inline constexpr const char* kDefaultPromptTemplate =
    "{question}\n{options}\nAnswer with the letter of the correct option.";

// Options render as "A. ...", "B. ..." with Latin letters in every language;
// one "<image>" token is prepended per image_ref. Template must contain
// {question} and {options}. More than 26 options is an error.
std::string format_prompt(const EvalItem& item, const std::string& template_str);

enum class ExtractionRule { letter, exact_text, substring, abstain };

std::string_view to_string(ExtractionRule rule);
ExtractionRule parse_extraction_rule(std::string_view rule);

struct Extraction {
  static constexpr int kAbstain = -1;
  int index = kAbstain;
  ExtractionRule rule = ExtractionRule::abstain;

  bool abstained() const { return index == kAbstain; }
  bool operator==(const Extraction&) const = default;
};

// Deterministic, total extraction cascade:
//   1. first standalone letter A..Z (word-boundary delimited) indexing a
//      valid option;
//   2. whole generation, normalized (casefold, trim, strip trailing
//      punctuation), exactly equal to an option text;
//   3. longest option text contained in the generation (casefolded),
//      ties resolved to the lowest index;
//   4. ABSTAIN.
Extraction extract_answer(const std::string& generation, const std::vector<std::string>& options);

struct ItemOutcome {
  std::string item_id;
  Lang language = Lang::en;
  std::string raw_generation;
  Extraction extraction;
  bool correct = false;
  std::string error;  // non-empty when the backend failed for this item
};

struct LangAccuracy {
  std::uint64_t correct = 0;
  std::uint64_t total = 0;

  double accuracy() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) /
                                                          static_cast<double>(total); }
};

struct EvalResult {
  std::map<Lang, LangAccuracy> per_language;

  // Accuracy over every item regardless of language.
  double overall() const;
  // The English accuracy; absent when no English items were evaluated.
  std::optional<double> mmmu_en() const;
  // Unweighted mean of the non-English per-language accuracies.
  std::optional<double> mmmu_multi() const;
};

struct EvalRun {
  std::vector<ItemOutcome> items;

  EvalResult result() const;
};

struct RunEvalOptions {
  int max_tokens = 64;
  int parallelism = 1;
  ExecMode mode = ExecMode::openmp;
};

// One generation per item; ABSTAIN and per-item backend failures score as
// incorrect (failures are flagged in the log). Outcomes keep input order.
EvalRun run_eval(const std::vector<EvalItem>& items, GenerationBackend& backend,
                 const std::string& template_str, const RunEvalOptions& options = {});

// Per-item log: newline-delimited JSON records.
void save_eval_run(const EvalRun& run, const std::filesystem::path& path);
EvalRun load_eval_run(const std::filesystem::path& path);

nlohmann::json eval_result_to_json(const EvalResult& result);
EvalResult eval_result_from_json(const nlohmann::json& j);

// Markdown table with MMMU / MMMU Multi columns: best value per column in
// **bold**, second best __underlined__. Macro values are recomputed from the
// per-language counts, never read from stored fields.
std::string render_comparison(const std::vector<std::pair<std::string, EvalResult>>& rows);

}  // namespace m3pipe
