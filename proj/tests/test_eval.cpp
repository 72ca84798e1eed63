#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "m3pipe/errors.hpp"
#include "m3pipe/eval.hpp"
#include "m3pipe/translate.hpp"
#include "support/test_util.hpp"

using namespace m3pipe;
using namespace m3pipe::test;

namespace {

// Brute-force cascade oracle: same rules, written as plain scans without the
// implementation's early exits or folding helpers.
int oracle_extract(const std::string& gen, const std::vector<std::string>& options) {
  auto word_char = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  };
  for (std::size_t i = 0; i < gen.size(); ++i) {
    if (gen[i] >= 'A' && gen[i] <= 'Z') {
      bool standalone = (i == 0 || !word_char(gen[i - 1])) &&
                        (i + 1 == gen.size() || !word_char(gen[i + 1]));
      if (standalone && static_cast<std::size_t>(gen[i] - 'A') < options.size()) {
        return gen[i] - 'A';
      }
    }
  }
  auto norm = [](std::string s) {
    const std::string punct = ".,;:!?)]}\"'";
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                          s.back() == '\n' || punct.find(s.back()) != std::string::npos)) {
      s.pop_back();
    }
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    s = s.substr(b);
    for (char& c : s) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
  };
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (!norm(gen).empty() && norm(gen) == norm(options[i])) return static_cast<int>(i);
  }
  auto fold = [](std::string s) {
    for (char& c : s) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
  };
  int best = -1;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (options[i].empty()) continue;
    if (fold(gen).find(fold(options[i])) != std::string::npos &&
        options[i].size() > best_len) {
      best = static_cast<int>(i);
      best_len = options[i].size();
    }
  }
  return best;
}

ScriptedGenerationBackend oracle_backend(const std::vector<EvalItem>& items,
                                         const std::string& tmpl) {
  auto answers = std::make_shared<std::map<std::string, std::string>>();
  for (const EvalItem& item : items) {
    (*answers)[format_prompt(item, tmpl)] =
        std::string("The answer is ") + static_cast<char>('A' + item.answer_index) + ".";
  }
  return ScriptedGenerationBackend(
      [answers](const std::string& prompt, const std::vector<std::string>&, int) {
        return answers->at(prompt);
      });
}

}  // namespace

TEST_CASE("format_prompt renders Latin letters and image tokens") {
  EvalItem two = make_item("q", "Which?", {"cat", "dog"}, 0);
  std::string prompt = format_prompt(two, kDefaultPromptTemplate);
  CHECK(prompt.find("A. cat") != std::string::npos);
  CHECK(prompt.find("B. dog") != std::string::npos);
  CHECK(prompt.find("C.") == std::string::npos);
  CHECK(std::count(prompt.begin(), prompt.end(), '<') == 1);  // one image token

  EvalItem no_images = two;
  no_images.image_refs.clear();
  CHECK(format_prompt(no_images, kDefaultPromptTemplate).find("<image>") == std::string::npos);

  EvalItem localized = make_item("q2", "中文问题?",
                                 {"选项一", "选项二"}, 1, Lang::zh);
  std::string zh_prompt = format_prompt(localized, kDefaultPromptTemplate);
  CHECK(zh_prompt.find("A. 选项一") != std::string::npos);
  CHECK(zh_prompt.find("B. 选项二") != std::string::npos);
}

TEST_CASE("format_prompt golden fixture") {
  EvalItem item = make_item("golden", "What does the chart show?",
                            {"growth", "decline", "stability"}, 1);
  item.image_refs = {"images/a.png", "images/b.png"};
  std::string expected =
      "<image>\n<image>\nWhat does the chart show?\n"
      "A. growth\nB. decline\nC. stability\n"
      "Answer with the letter of the correct option.";
  CHECK(format_prompt(item, kDefaultPromptTemplate) == expected);
}

TEST_CASE("format_prompt validates its inputs") {
  EvalItem item = make_item("q", "x?", {"a", "b"}, 0);
  CHECK_THROWS_AS(format_prompt(item, "no slots"), ValidationError);
  CHECK_THROWS_AS(format_prompt(item, "{question} only"), ValidationError);
}

TEST_CASE("extraction cascade: spec examples") {
  std::vector<std::string> options = {"red", "green", "blue", "yellow"};
  Extraction first = extract_answer("The answer is B.", options);
  CHECK(first.index == 1);
  CHECK(first.rule == ExtractionRule::letter);

  Extraction exact = extract_answer("blue.", options);
  CHECK(exact.index == 2);
  CHECK(exact.rule == ExtractionRule::exact_text);

  Extraction longest = extract_answer("i would say greenish but maybe yellowish", options);
  CHECK(longest.index == 3);  // "yellow" (6) beats "green" (5)
  CHECK(longest.rule == ExtractionRule::substring);

  Extraction none = extract_answer("no idea at all", options);
  CHECK(none.abstained());
  CHECK(none.rule == ExtractionRule::abstain);
}

TEST_CASE("letters outside the option range do not match rule 1") {
  std::vector<std::string> two = {"alpha", "beta"};
  // 'I' and 'Z' exceed two options; 'A' inside a word does not count
  Extraction ex = extract_answer("I Zee nothing in CAB", two);
  CHECK(ex.abstained());
  CHECK(extract_answer("It is B", two).index == 1);
}

TEST_CASE("extraction matches the brute-force oracle on a 200-generation suite") {
  TextGen gen(55);
  std::vector<std::vector<std::string>> option_sets = {
      {"red", "green", "blue"},
      {"a tiny option", "a much longer option text", "short"},
      {"Paris", "London", "Berlin", "Madrid", "Rome"},
      {"yes", "no"},
      {"first choice", "second choice", "third choice", "fourth", "fifth", "sixth"},
  };
  std::vector<std::string> shapes = {
      "The answer is %L.",  "%O",          "%O.",           "i think %O is right",
      "maybe %L or %L",     "unclear",     " %L ",          "answer: %L because %O",
      "%Onot-a-boundary",   "(%L)",        "\"%O\"",        "x%L",
      "The ANSWER could be %O and %O", "nothing here", "42", "%L.%L",
  };
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const auto& options = option_sets[gen.next() % option_sets.size()];
    std::string shape = shapes[gen.next() % shapes.size()];
    std::string text;
    for (std::size_t p = 0; p < shape.size(); ++p) {
      if (shape[p] == '%' && p + 1 < shape.size() && shape[p + 1] == 'L') {
        text.push_back(static_cast<char>('A' + gen.next() % 8));
        ++p;
      } else if (shape[p] == '%' && p + 1 < shape.size() && shape[p + 1] == 'O') {
        text += options[gen.next() % options.size()];
        ++p;
      } else {
        text.push_back(shape[p]);
      }
    }
    Extraction got = extract_answer(text, options);
    int expected = oracle_extract(text, options);
    CAPTURE(text);
    CHECK(got.index == expected);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("run_eval with a scripted oracle backend scores 100 everywhere") {
  std::vector<EvalItem> items;
  for (Lang lang : kAllLangs) {
    for (int i = 0; i < 8; ++i) {
      std::string id = std::string(to_string(lang)) + std::to_string(i);
      items.push_back(make_item(id, "question " + id + "?", {"w", "x", "y", "z"}, i % 4, lang));
    }
  }
  ScriptedGenerationBackend backend = oracle_backend(items, kDefaultPromptTemplate);
  RunEvalOptions options;
  options.parallelism = 3;
  EvalRun run = run_eval(items, backend, kDefaultPromptTemplate, options);
  EvalResult result = run.result();
  CHECK(result.mmmu_en() == doctest::Approx(100.0));
  CHECK(result.mmmu_multi() == doctest::Approx(100.0));
  for (const auto& [lang, acc] : result.per_language) CHECK(acc.accuracy() == 100.0);
}

TEST_CASE("always-A backend scores exactly the fraction of A answers") {
  std::vector<EvalItem> items;
  for (int i = 0; i < 40; ++i) {
    items.push_back(make_item("i" + std::to_string(i), "q?", {"p", "q", "r", "s"}, i % 4));
  }
  ScriptedGenerationBackend backend(
      [](const std::string&, const std::vector<std::string>&, int) { return std::string("A"); });
  EvalRun run = run_eval(items, backend, kDefaultPromptTemplate, RunEvalOptions{});
  CHECK(run.result().per_language.at(Lang::en).accuracy() == 25.0);
}

TEST_CASE("abstentions score incorrect; backend failures are flagged") {
  std::vector<EvalItem> items = {make_item("ok", "q?", {"alpha", "beta"}, 0),
                                 make_item("fail", "q?", {"alpha", "beta"}, 0)};
  ScriptedGenerationBackend backend(
      [](const std::string& prompt, const std::vector<std::string>&, int) -> std::string {
        if (prompt.find("[fail]") != std::string::npos) throw TransportError("backend down");
        return "mumble mumble";  // abstains
      });
  // the question text carries a marker the scripted backend can see
  std::vector<EvalItem> tagged = items;
  tagged[0].question += " [ok]";
  tagged[1].question += " [fail]";
  EvalRun run = run_eval(tagged, backend, kDefaultPromptTemplate, RunEvalOptions{});
  REQUIRE(run.items.size() == 2);
  CHECK(run.items[0].extraction.abstained());
  CHECK_FALSE(run.items[0].correct);
  CHECK(run.items[0].error.empty());
  CHECK_FALSE(run.items[1].correct);
  CHECK_FALSE(run.items[1].error.empty());
  CHECK(run.result().per_language.at(Lang::en).accuracy() == 0.0);
}

TEST_CASE("mmmu_multi equals the unweighted mean of the ten target accuracies") {
  EvalRun run;
  int counter = 0;
  for (Lang lang : kAllLangs) {
    int total = 20;
    int correct = (counter * 3) % (total + 1);
    for (int i = 0; i < total; ++i) {
      ItemOutcome o;
      o.item_id = std::string(to_string(lang)) + std::to_string(i);
      o.language = lang;
      o.correct = i < correct;
      run.items.push_back(std::move(o));
    }
    ++counter;
  }
  EvalResult result = run.result();
  double manual = 0;
  for (const auto& [lang, acc] : result.per_language) {
    if (lang != Lang::en) manual += acc.accuracy();
  }
  manual /= 10.0;
  REQUIRE(result.mmmu_multi().has_value());
  CHECK(std::fabs(*result.mmmu_multi() - manual) <= 1e-9);
}

TEST_CASE("accuracy equals a brute-force recount of the per-item log") {
  TempDir dir("eval-log");
  std::vector<EvalItem> items;
  for (int i = 0; i < 30; ++i) {
    items.push_back(make_item("r" + std::to_string(i), "pick?", {"u", "v", "w"}, i % 3,
                              i % 2 == 0 ? Lang::en : Lang::hi));
  }
  MockGenerationBackend backend;
  EvalRun run = run_eval(items, backend, kDefaultPromptTemplate, RunEvalOptions{});
  save_eval_run(run, dir / "log.jsonl");
  EvalRun loaded = load_eval_run(dir / "log.jsonl");
  REQUIRE(loaded.items.size() == run.items.size());

  std::map<Lang, std::pair<int, int>> recount;
  for (const ItemOutcome& o : loaded.items) {
    ++recount[o.language].second;
    if (o.correct) ++recount[o.language].first;
  }
  EvalResult result = run.result();
  for (const auto& [lang, counts] : recount) {
    CHECK(result.per_language.at(lang).correct == static_cast<std::uint64_t>(counts.first));
    CHECK(result.per_language.at(lang).total == static_cast<std::uint64_t>(counts.second));
  }
}

TEST_CASE("render_comparison: bold best, underline second best") {
  auto result_with = [](double mmmu, double multi) {
    EvalResult r;
    r.per_language[Lang::en] = {static_cast<std::uint64_t>(std::llround(mmmu * 100)), 10000};
    for (Lang lang : target_langs()) {
      r.per_language[lang] = {static_cast<std::uint64_t>(std::llround(multi * 100)), 10000};
    }
    return r;
  };
  std::vector<std::pair<std::string, EvalResult>> rows = {
      {"row1", result_with(31.02, 29.83)}, {"row2", result_with(34.14, 31.21)},
      {"row3", result_with(36.69, 33.57)}, {"row4", result_with(37.07, 32.90)},
      {"row5", result_with(37.27, 33.45)}, {"row6", result_with(35.19, 32.93)},
      {"row7", result_with(35.65, 32.60)},
  };
  std::string table = render_comparison(rows);
  CHECK(table.find("**37.27**") != std::string::npos);
  CHECK(table.find("__37.07__") != std::string::npos);
  CHECK(table.find("**33.57**") != std::string::npos);
  CHECK(table.find("__33.45__") != std::string::npos);
  CHECK(table.find("**36.69**") == std::string::npos);

  std::string single = render_comparison({{"only", result_with(10.0, 20.0)}});
  CHECK(single.find("**10.00**") != std::string::npos);
  CHECK(single.find("**20.00**") != std::string::npos);
  CHECK(single.find("__") == std::string::npos);
}

TEST_CASE("render_comparison: three-model comparison fixture") {
  auto result_with = [](double mmmu, double multi) {
    EvalResult r;
    r.per_language[Lang::en] = {static_cast<std::uint64_t>(std::llround(mmmu * 100)), 10000};
    for (Lang lang : target_langs()) {
      r.per_language[lang] = {static_cast<std::uint64_t>(std::llround(multi * 100)), 10000};
    }
    return r;
  };
  std::string table = render_comparison({{"PALO", result_with(28.36, 13.12)},
                                         {"Qwen-VL 2.5", result_with(52.89, 25.46)},
                                         {"Our Model", result_with(37.27, 33.45)}});
  CHECK(table.find("**52.89**") != std::string::npos);
  CHECK(table.find("__37.27__") != std::string::npos);
  CHECK(table.find("**33.45**") != std::string::npos);
  CHECK(table.find("__25.46__") != std::string::npos);
  CHECK(table.find("| Our Model | __37.27__ | **33.45** |") != std::string::npos);
}

TEST_CASE("column mismatch is an error") {
  EvalResult no_multi;
  no_multi.per_language[Lang::en] = {5, 10};
  CHECK_THROWS_AS(render_comparison({{"bad", no_multi}}), ValidationError);

  EvalResult no_en;
  no_en.per_language[Lang::zh] = {5, 10};
  CHECK_THROWS_AS(render_comparison({{"bad", no_en}}), ValidationError);
  CHECK_THROWS_AS(render_comparison({}), ValidationError);
}

TEST_CASE("round-tripped items leave extraction on fixed generations unchanged") {
  MockTranslationBackend translator;
  TextGen gen(13);
  for (int i = 0; i < 50; ++i) {
    EvalItem item = make_item("bt" + std::to_string(i), gen.sentence(3, 8),
                              {gen.sentence(1, 3), gen.sentence(1, 3), gen.sentence(1, 3)},
                              static_cast<int>(gen.next() % 3));
    EvalItem forward =
        translate_eval_item(item, Lang::ru, translator, default_placeholder_patterns());
    EvalItem back =
        translate_eval_item(forward, Lang::en, translator, default_placeholder_patterns());
    std::string generation = "The answer is " +
                             std::string(1, static_cast<char>('A' + gen.next() % 4)) + ".";
    CHECK(extract_answer(generation, item.options).index ==
          extract_answer(generation, back.options).index);
  }
}

TEST_CASE("eval result json round trip") {
  EvalResult r;
  r.per_language[Lang::en] = {50, 100};
  r.per_language[Lang::zh] = {30, 100};
  EvalResult back = eval_result_from_json(eval_result_to_json(r));
  CHECK(back.per_language.at(Lang::en).correct == 50);
  CHECK(back.per_language.at(Lang::zh).total == 100);
  CHECK(*back.mmmu_en() == doctest::Approx(50.0));
}
