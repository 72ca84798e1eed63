#include "m3pipe/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "m3pipe/errors.hpp"

namespace m3pipe {

using nlohmann::json;

std::string format_prompt(const EvalItem& item, const std::string& template_str) {
  if (template_str.find("{question}") == std::string::npos ||
      template_str.find("{options}") == std::string::npos) {
    throw ValidationError("prompt template must contain {question} and {options}");
  }
  if (item.options.size() > 26) {
    throw ValidationError("eval item '" + item.id + "' has more than 26 options");
  }
  std::string options;
  for (std::size_t i = 0; i < item.options.size(); ++i) {
    if (i > 0) options.push_back('\n');
    options.push_back(static_cast<char>('A' + i));
    options += ". ";
    options += item.options[i];
  }
  std::string body = template_str;
  auto replace_slot = [&](const std::string& slot, const std::string& value) {
    std::size_t pos;
    while ((pos = body.find(slot)) != std::string::npos) {
      body.replace(pos, slot.size(), value);
    }
  };
  replace_slot("{question}", item.question);
  replace_slot("{options}", options);

  std::string prompt;
  for (std::size_t i = 0; i < item.image_refs.size(); ++i) prompt += "<image>\n";
  prompt += body;
  return prompt;
}

std::string_view to_string(ExtractionRule rule) {
  switch (rule) {
    case ExtractionRule::letter: return "letter";
    case ExtractionRule::exact_text: return "exact_text";
    case ExtractionRule::substring: return "substring";
    case ExtractionRule::abstain: return "abstain";
  }
  return "abstain";
}

ExtractionRule parse_extraction_rule(std::string_view rule) {
  if (rule == "letter") return ExtractionRule::letter;
  if (rule == "exact_text") return ExtractionRule::exact_text;
  if (rule == "substring") return ExtractionRule::substring;
  if (rule == "abstain") return ExtractionRule::abstain;
  throw ValidationError("unknown extraction rule '" + std::string(rule) + "'");
}

namespace {

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

std::string casefold_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

std::string normalize_answer(const std::string& s) {
  static const std::string kTrailing = ".,;:!?)]}\"'";
  std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return std::string();
  std::size_t end = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(begin, end - begin + 1);
  while (!out.empty() && (kTrailing.find(out.back()) != std::string::npos ||
                          out.back() == ' ' || out.back() == '\t')) {
    out.pop_back();
  }
  return casefold_ascii(std::move(out));
}

}  // namespace

Extraction extract_answer(const std::string& generation, const std::vector<std::string>& options) {
  // Rule 1: standalone capital letter naming a valid option.
  for (std::size_t i = 0; i < generation.size(); ++i) {
    char c = generation[i];
    if (c < 'A' || c > 'Z') continue;
    bool left_ok = i == 0 || !is_word_char(generation[i - 1]);
    bool right_ok = i + 1 >= generation.size() || !is_word_char(generation[i + 1]);
    if (!left_ok || !right_ok) continue;
    std::size_t index = static_cast<std::size_t>(c - 'A');
    if (index < options.size()) {
      return Extraction{static_cast<int>(index), ExtractionRule::letter};
    }
  }
  // Rule 2: normalized whole-generation match.
  std::string norm_gen = normalize_answer(generation);
  if (!norm_gen.empty()) {
    for (std::size_t i = 0; i < options.size(); ++i) {
      if (normalize_answer(options[i]) == norm_gen) {
        return Extraction{static_cast<int>(i), ExtractionRule::exact_text};
      }
    }
  }
  // Rule 3: longest option text appearing inside the generation.
  std::string folded_gen = casefold_ascii(generation);
  int best = Extraction::kAbstain;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (options[i].empty()) continue;
    std::string needle = casefold_ascii(options[i]);
    if (folded_gen.find(needle) == std::string::npos) continue;
    if (options[i].size() > best_len) {
      best_len = options[i].size();
      best = static_cast<int>(i);
    }
  }
  if (best != Extraction::kAbstain) return Extraction{best, ExtractionRule::substring};
  return Extraction{};
}

double EvalResult::overall() const {
  std::uint64_t correct = 0, total = 0;
  for (const auto& [lang, acc] : per_language) {
    correct += acc.correct;
    total += acc.total;
  }
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

std::optional<double> EvalResult::mmmu_en() const {
  auto it = per_language.find(Lang::en);
  if (it == per_language.end()) return std::nullopt;
  return it->second.accuracy();
}

std::optional<double> EvalResult::mmmu_multi() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& [lang, acc] : per_language) {
    if (lang == Lang::en) continue;
    sum += acc.accuracy();
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

EvalResult EvalRun::result() const {
  EvalResult r;
  for (const ItemOutcome& o : items) {
    LangAccuracy& acc = r.per_language[o.language];
    ++acc.total;
    if (o.correct) ++acc.correct;
  }
  return r;
}

EvalRun run_eval(const std::vector<EvalItem>& items, GenerationBackend& backend,
                 const std::string& template_str, const RunEvalOptions& options) {
  if (options.max_tokens < 1) throw ValidationError("max_tokens must be >= 1");
  EvalRun run;
  run.items.resize(items.size());
  for_each_index(options.mode, items.size(), options.parallelism, [&](std::size_t i) {
    const EvalItem& item = items[i];
    ItemOutcome& out = run.items[i];
    out.item_id = item.id;
    out.language = item.language;
    std::string prompt = format_prompt(item, template_str);
    try {
      out.raw_generation = backend.generate(prompt, item.image_refs, options.max_tokens);
    } catch (const TransportError& e) {
      out.error = e.what();
    } catch (const ProtocolError& e) {
      out.error = e.what();
    }
    out.extraction = out.error.empty() ? extract_answer(out.raw_generation, item.options)
                                       : Extraction{};
    out.correct = !out.extraction.abstained() && out.extraction.index == item.answer_index;
  });
  return run;
}

void save_eval_run(const EvalRun& run, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write eval log " + path.string());
  for (const ItemOutcome& o : run.items) {
    json j{{"item_id", o.item_id},
           {"language", std::string(to_string(o.language))},
           {"raw_generation", o.raw_generation},
           {"extraction_rule", std::string(to_string(o.extraction.rule))},
           {"correct", o.correct}};
    if (o.extraction.abstained()) {
      j["extracted"] = "ABSTAIN";
    } else {
      j["extracted"] = o.extraction.index;
    }
    if (!o.error.empty()) j["error"] = o.error;
    out << j.dump() << '\n';
  }
  if (!out) throw Error("I/O failure writing eval log " + path.string());
}

EvalRun load_eval_run(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open eval log " + path.string());
  EvalRun run;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    ItemOutcome o;
    o.item_id = j.at("item_id").get<std::string>();
    o.language = parse_lang(j.at("language").get<std::string>());
    o.raw_generation = j.value("raw_generation", std::string());
    o.extraction.rule = parse_extraction_rule(j.value("extraction_rule", "abstain"));
    if (j.at("extracted").is_number_integer()) {
      o.extraction.index = j["extracted"].get<int>();
    }
    o.correct = j.at("correct").get<bool>();
    o.error = j.value("error", std::string());
    run.items.push_back(std::move(o));
  }
  return run;
}

json eval_result_to_json(const EvalResult& result) {
  json langs = json::object();
  for (const auto& [lang, acc] : result.per_language) {
    langs[std::string(to_string(lang))] = {
        {"correct", acc.correct}, {"total", acc.total}, {"accuracy", acc.accuracy()}};
  }
  json j{{"per_language", std::move(langs)}};
  if (auto v = result.mmmu_en()) j["mmmu_en"] = *v;
  if (auto v = result.mmmu_multi()) j["mmmu_multi"] = *v;
  return j;
}

EvalResult eval_result_from_json(const json& j) {
  EvalResult r;
  for (auto it = j.at("per_language").begin(); it != j.at("per_language").end(); ++it) {
    LangAccuracy acc;
    acc.correct = it.value().at("correct").get<std::uint64_t>();
    acc.total = it.value().at("total").get<std::uint64_t>();
    r.per_language[parse_lang(it.key())] = acc;
  }
  return r;
}

namespace {

std::string format_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Display-rounded value, so bold/underline assignment matches what readers see.
double rounded(double v) { return std::strtod(format_pct(v).c_str(), nullptr); }

}  // namespace

std::string render_comparison(const std::vector<std::pair<std::string, EvalResult>>& rows) {
  if (rows.empty()) throw ValidationError("comparison table needs at least one result");
  struct Cells {
    double mmmu;
    double multi;
  };
  std::vector<Cells> cells;
  for (const auto& [label, result] : rows) {
    auto en = result.mmmu_en();
    auto multi = result.mmmu_multi();
    if (!en) throw ValidationError("column mismatch: result '" + label + "' has no MMMU column");
    if (!multi) {
      throw ValidationError("column mismatch: result '" + label + "' has no MMMU Multi column");
    }
    cells.push_back(Cells{rounded(*en), rounded(*multi)});
  }
  auto decorate = [&](auto proj) {
    double best = proj(cells[0]);
    bool has_second = false;
    double second = 0.0;
    for (const Cells& c : cells) best = std::max(best, proj(c));
    for (const Cells& c : cells) {
      double v = proj(c);
      if (v < best && (!has_second || v > second)) {
        has_second = true;
        second = v;
      }
    }
    std::vector<std::string> out;
    for (const Cells& c : cells) {
      double v = proj(c);
      std::string text = format_pct(v);
      if (v == best) {
        out.push_back("**" + text + "**");
      } else if (has_second && v == second) {
        out.push_back("__" + text + "__");
      } else {
        out.push_back(text);
      }
    }
    return out;
  };
  std::vector<std::string> mmmu_cells = decorate([](const Cells& c) { return c.mmmu; });
  std::vector<std::string> multi_cells = decorate([](const Cells& c) { return c.multi; });

  std::string table = "| Model | MMMU | MMMU Multi |\n|---|---|---|\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table += "| " + rows[i].first + " | " + mmmu_cells[i] + " | " + multi_cells[i] + " |\n";
  }
  return table;
}

}  // namespace m3pipe
