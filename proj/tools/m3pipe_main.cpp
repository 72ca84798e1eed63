// m3pipe: corpus translation, QA, curation, mixing, and evaluation pipeline.
// Progress goes to stderr; data goes to files. Exit codes: 0 success,
// 1 validation failure, 2 transport failure, 3 integrity failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "m3pipe/config.hpp"
#include "m3pipe/curation.hpp"
#include "m3pipe/errors.hpp"
#include "m3pipe/eval.hpp"
#include "m3pipe/http_backend.hpp"
#include "m3pipe/manifest.hpp"
#include "m3pipe/mixture.hpp"
#include "m3pipe/qa.hpp"
#include "m3pipe/shard_io.hpp"
#include "m3pipe/summary.hpp"
#include "m3pipe/translate.hpp"

namespace fs = std::filesystem;
using namespace m3pipe;

namespace {

bool g_quiet = false;

void note(const std::string& message) {
  if (!g_quiet) std::cerr << "m3pipe: " << message << "\n";
}

RetryPolicy retry_policy(const PipelineConfig& config) {
  RetryPolicy policy;
  policy.retries = config.retries;
  policy.backoff_base_ms = config.backoff_base_ms;
  policy.backoff_factor = config.backoff_factor;
  policy.batch_cap = config.batch_cap;
  policy.auth_token = config.auth_token;
  return policy;
}

struct CommonArgs {
  std::string config_path;
  std::map<std::string, std::string> overrides;

  PipelineConfig load() const {
    std::optional<fs::path> file;
    if (!config_path.empty()) {
      file = fs::path(config_path);
    } else {
      file = default_config_file();
    }
    return load_config(file, env_overrides(), overrides);
  }
};

std::vector<EvalItem> load_items(const std::vector<std::string>& manifests,
                                 const std::set<std::string>& langs) {
  std::vector<EvalItem> items;
  for (const std::string& m : manifests) {
    for_each_manifest_record(m, [&](Record&& rec) {
      EvalItem* item = std::get_if<EvalItem>(&rec);
      if (item == nullptr) {
        throw ValidationError("manifest " + m + " holds non-eval_item records");
      }
      if (langs.empty() || langs.count(std::string(to_string(item->language))) != 0) {
        items.push_back(std::move(*item));
      }
    });
  }
  return items;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
  if (!out) throw Error("I/O failure writing " + path.string());
}

int run_translate(const CommonArgs& common, const std::string& manifest, const std::string& out,
                  bool serial) {
  PipelineConfig config = common.load();
  TranslationJob::Config job;
  job.source_manifest = manifest;
  job.targets = config.target_langs();
  for (Lang t : job.targets) {
    if (t == Lang::en) throw ValidationError("'en' cannot be a translation target");
  }
  job.backend = make_translation_backend(config.translate_url, retry_policy(config));
  job.placeholder_patterns = config.placeholder_patterns;
  job.parallelism = config.parallelism;
  job.mode = serial ? ExecMode::serial : ExecMode::openmp;
  job.checkpoint_dir = config.checkpoint_dir;
  job.output_dir = out;

  RunSummary summary("translate", config_hash(config));
  summary.add_input(manifest);
  TranslationJob::Result result = TranslationJob::run(job);
  if (!result.completed) {
    note("job interrupted; re-run the same command to resume");
    return 1;
  }
  std::uint64_t translated = 0, dead = 0;
  for (const auto& [lang, m] : result.manifests) {
    summary.add_output((fs::path(out) / m.file_name()).string());
    translated += result.translated.at(lang);
    dead += result.dead_letters.at(lang);
  }
  summary.set_count("translated", translated);
  summary.set_count("dead_letters", dead);
  summary.set_count("shards_processed", result.shards_processed_this_run);
  summary.write(fs::path(out) / "run-summary.translate.json");
  note("translated " + std::to_string(translated) + " records into " +
       std::to_string(result.manifests.size()) + " languages (" + std::to_string(dead) +
       " dead letters)");
  return 0;
}

int run_filter(const CommonArgs& common, const std::string& manifest, const std::string& out,
               bool serial) {
  PipelineConfig config = common.load();
  auto backend = make_embedding_backend(config.embed_url, retry_policy(config));
  FilterOptions options;
  options.threshold = config.similarity_threshold;
  options.min_caption_chars = config.min_caption_chars;
  options.batch_cap = config.batch_cap;
  options.parallelism = config.parallelism;
  options.mode = serial ? ExecMode::serial : ExecMode::openmp;
  options.shard_size = config.shard_size;

  RunSummary summary("filter", config_hash(config));
  summary.add_input(manifest);
  FilterResult result = filter_dataset(manifest, *backend, options, out);
  summary.add_output((fs::path(out) / result.kept.file_name()).string());
  summary.add_output(result.scores_path.string());
  summary.set_count("total", result.stats.total);
  summary.set_count("kept", result.stats.kept);
  summary.set_count("rejected", result.stats.rejected);
  summary.set_count("errored", result.stats.errored);
  summary.write(fs::path(out) / "run-summary.filter.json");
  char pct[32];
  std::snprintf(pct, sizeof(pct), "%.2f", 100.0 * result.stats.filtered_fraction());
  note("kept " + std::to_string(result.stats.kept) + "/" + std::to_string(result.stats.total) +
       " (" + pct + "% filtered)");
  return 0;
}

int run_mix(const CommonArgs& common, const std::string& preset_name, const std::string& spec_file,
            const std::string& data_dir, const std::string& out, bool virtual_only,
            const std::string& mtext_flores, const std::string& mtext_xsc) {
  PipelineConfig config = common.load();
  RunSummary summary("mix", config_hash(config));
  MixtureOptions options;
  options.shard_size = config.shard_size;
  options.virtual_only = virtual_only;

  if (!mtext_flores.empty() || !mtext_xsc.empty()) {
    if (mtext_flores.empty() || mtext_xsc.empty()) {
      throw ValidationError("--build-mtext needs both --flores and --xstorycloze manifests");
    }
    summary.add_input(mtext_flores);
    summary.add_input(mtext_xsc);
    Manifest mtext = build_mtext(mtext_flores, mtext_xsc, out, config.shard_size);
    summary.add_output((fs::path(out) / mtext.file_name()).string());
    summary.set_count("mtext_pairs", mtext.total_count);
    summary.write(fs::path(out) / "run-summary.mix.json");
    note("MText built with " + std::to_string(mtext.total_count) + " pairs");
    return 0;
  }

  std::vector<MixtureSpec> specs;
  if (!preset_name.empty()) {
    bool found = false;
    for (StagePreset& preset : stage_presets(config.seed)) {
      if (preset.name != preset_name) continue;
      found = true;
      specs.push_back(resolve_components(preset.stage2, data_dir));
      if (preset.stage3) specs.push_back(resolve_components(*preset.stage3, data_dir));
    }
    if (!found) {
      throw ValidationError("unknown preset '" + preset_name +
                            "' (valid: table2-row1 .. table2-row7)");
    }
  } else if (!spec_file.empty()) {
    MixtureSpec spec = load_mixture_spec(spec_file);
    spec.seed = config.seed;
    specs.push_back(std::move(spec));
  } else {
    throw ValidationError("mix needs --preset or --spec (or --build-mtext)");
  }

  for (const MixtureSpec& spec : specs) {
    MixtureOutput output = build_mixture(spec, options, out);
    if (output.manifest) {
      summary.add_output((fs::path(out) / output.manifest->file_name()).string());
      summary.set_count(spec.name, output.manifest->total_count);
    } else {
      summary.add_output(output.index_path.string());
      summary.set_count(spec.name, output.report.total_selected);
    }
    note("mixture " + spec.name + ": " + std::to_string(output.report.total_selected) +
         " records from " + std::to_string(output.report.components.size()) + " components");
  }
  summary.write(fs::path(out) / "run-summary.mix.json");
  return 0;
}

int run_qa(const CommonArgs& common, const std::string& dataset, const std::string& out,
           const std::string& workdir_arg, const std::string& gen_backend_url, bool serial) {
  PipelineConfig config = common.load();
  auto backend = make_translation_backend(config.translate_url, retry_policy(config));
  fs::path report_path = out;
  fs::path workdir = workdir_arg.empty()
                         ? (report_path.has_parent_path() ? report_path.parent_path() : ".") /
                               "qa-work"
                         : fs::path(workdir_arg);

  RoundTripOptions options;
  options.patterns = config.placeholder_patterns;
  options.parallelism = config.parallelism;
  options.mode = serial ? ExecMode::serial : ExecMode::openmp;
  options.shard_size = config.shard_size;

  RunSummary summary("qa", config_hash(config));
  summary.add_input(dataset);

  std::map<Lang, RoundTripOutcome> outcomes;
  std::map<Lang, double> chrf_by_pivot;
  for (Lang tgt : config.target_langs()) {
    RoundTripOutcome outcome = round_trip_dataset(dataset, tgt, *backend, options, workdir);
    chrf_by_pivot[tgt] = outcome.mean_chrf;
    outcomes[tgt] = std::move(outcome);
    note("round trip via " + std::string(to_string(tgt)) + ": chrF " +
         std::to_string(outcomes[tgt].mean_chrf));
  }

  std::string report;
  if (!gen_backend_url.empty()) {
    Manifest source = load_manifest(dataset);
    if (source.record_type != RecordType::eval_item) {
      throw ValidationError("accuracy QA requires an eval_item dataset");
    }
    auto generator = make_generation_backend(gen_backend_url, retry_policy(config));
    RunEvalOptions eval_options;
    eval_options.max_tokens = config.max_tokens;
    eval_options.parallelism = config.parallelism;
    eval_options.mode = options.mode;

    std::vector<EvalItem> original_items = load_items({dataset}, {});
    EvalRun original = run_eval(original_items, *generator, kDefaultPromptTemplate, eval_options);
    std::map<Lang, EvalRun> bt_runs;
    for (const auto& [tgt, outcome] : outcomes) {
      fs::path bt_manifest = workdir / outcome.manifest.file_name();
      std::vector<EvalItem> bt_items = load_items({bt_manifest.string()}, {});
      bt_runs[tgt] = run_eval(bt_items, *generator, kDefaultPromptTemplate, eval_options);
    }
    QaReport qa = build_report(original, bt_runs, config.flag_threshold, chrf_by_pivot);
    report = render_qa_report(qa);
    summary.set_count("flagged_languages",
                      static_cast<std::uint64_t>(std::count_if(
                          qa.per_language.begin(), qa.per_language.end(),
                          [](const QaRow& row) { return row.flagged; })));
  } else {
    report = "| Language | chrF | records | dead letters | structure |\n|---|---|---|---|---|\n";
    for (const auto& [tgt, outcome] : outcomes) {
      char chrf_cell[32];
      std::snprintf(chrf_cell, sizeof(chrf_cell), "%.4f", outcome.mean_chrf);
      report += "| " + std::string(to_string(tgt)) + " | " + chrf_cell + " | " +
                std::to_string(outcome.records) + " | " + std::to_string(outcome.dead_letters) +
                " | " +
                (outcome.structure_violations == 0
                     ? "ok"
                     : std::to_string(outcome.structure_violations) + " violations") +
                " |\n";
    }
  }
  write_file(report_path, report);
  summary.add_output(report_path.string());
  summary.write(report_path.string() + ".summary.json");
  note("QA report written to " + report_path.string());
  return 0;
}

int run_eval_cmd(const CommonArgs& common, const std::vector<std::string>& manifests,
                 const std::string& template_file, const std::string& langs_arg,
                 const std::string& out, bool serial) {
  PipelineConfig config = common.load();
  auto backend = make_generation_backend(config.generate_url, retry_policy(config));
  std::set<std::string> langs;
  if (!langs_arg.empty() && langs_arg != "all") {
    std::size_t begin = 0;
    while (begin < langs_arg.size()) {
      std::size_t comma = langs_arg.find(',', begin);
      std::string item = langs_arg.substr(
          begin, comma == std::string::npos ? std::string::npos : comma - begin);
      if (!item.empty()) {
        parse_lang(item);  // validate
        langs.insert(item);
      }
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
  }
  std::vector<EvalItem> items = load_items(manifests, langs);
  if (items.empty()) throw ValidationError("no eval items matched the language filter");

  std::string template_str = kDefaultPromptTemplate;
  if (!template_file.empty()) template_str = read_file(template_file);

  RunEvalOptions options;
  options.max_tokens = config.max_tokens;
  options.parallelism = config.parallelism;
  options.mode = serial ? ExecMode::serial : ExecMode::openmp;

  RunSummary summary("eval", config_hash(config));
  for (const std::string& m : manifests) summary.add_input(m);
  EvalRun run = run_eval(items, *backend, template_str, options);
  EvalResult result = run.result();

  fs::create_directories(out);
  save_eval_run(run, fs::path(out) / "per_item_log.jsonl");
  write_file(fs::path(out) / "result.json", eval_result_to_json(result).dump(2) + "\n");
  summary.add_output((fs::path(out) / "per_item_log.jsonl").string());
  summary.add_output((fs::path(out) / "result.json").string());
  summary.set_count("items", run.items.size());
  summary.write(fs::path(out) / "run-summary.eval.json");

  if (auto v = result.mmmu_en()) note("MMMU (en): " + std::to_string(*v));
  if (auto v = result.mmmu_multi()) note("MMMU Multi: " + std::to_string(*v));
  return 0;
}

int run_report(const CommonArgs& common, const std::vector<std::string>& results,
               const std::string& labels_arg, const std::string& out) {
  PipelineConfig config = common.load();
  std::vector<std::string> labels;
  if (!labels_arg.empty()) {
    std::size_t begin = 0;
    while (begin <= labels_arg.size()) {
      std::size_t comma = labels_arg.find(',', begin);
      labels.push_back(labels_arg.substr(
          begin, comma == std::string::npos ? std::string::npos : comma - begin));
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
    if (labels.size() != results.size()) {
      throw ValidationError("--labels must name exactly one label per result file");
    }
  }
  std::vector<std::pair<std::string, EvalResult>> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    nlohmann::json j = nlohmann::json::parse(read_file(results[i]));
    std::string label = labels.empty() ? fs::path(results[i]).stem().string() : labels[i];
    rows.emplace_back(label, eval_result_from_json(j));
  }
  std::string table = render_comparison(rows);
  write_file(out, table);
  RunSummary summary("report", config_hash(config));
  for (const std::string& r : results) summary.add_input(r);
  summary.add_output(out);
  summary.write(out + ".summary.json");
  note("comparison table written to " + out);
  return 0;
}

int run_serve(const CommonArgs& common, const std::string& host, int port) {
  PipelineConfig config = common.load();
  (void)config;
  MockTranslationBackend translation;
  MockEmbeddingBackend embedding;
  MockGenerationBackend generation;
  note("serving mock backends on " + host + ":" + std::to_string(port));
  serve_backends(host, port, translation, embedding, generation);
  return 0;
}

int run_validate(const CommonArgs& common, const std::vector<std::string>& manifests,
                 const std::string& summary_path) {
  RunSummary summary("validate-manifest", config_hash(common.load()));
  std::uint64_t records = 0;
  for (const std::string& path : manifests) {
    validate_manifest(path);
    records += load_manifest(path).total_count;
    summary.add_input(path);
    note(path + ": ok");
  }
  summary.set_count("manifests", manifests.size());
  summary.set_count("records", records);
  if (!summary_path.empty()) summary.write(summary_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multilingual corpus pipeline and evaluation harness"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonArgs common;
  std::string seed_arg, parallelism_arg;
  app.add_option("--config", common.config_path, "config file (default: ./m3pipe.conf)");
  app.add_option("--seed", seed_arg, "override the run seed");
  app.add_option("--parallelism", parallelism_arg, "override worker count");
  app.add_flag("--quiet", g_quiet, "suppress progress output");

  // translate
  auto* translate = app.add_subcommand("translate", "translate a dataset into target languages");
  translate->fallthrough();
  std::string tr_manifest, tr_targets, tr_backend, tr_ckpt, tr_out = "translated";
  bool tr_serial = false;
  translate->add_option("--manifest", tr_manifest, "source manifest (English)")->required();
  translate->add_option("--targets", tr_targets, "comma-separated target languages");
  translate->add_option("--backend", tr_backend, "translation backend URL or mock:");
  translate->add_option("--checkpoint-dir", tr_ckpt, "checkpoint directory");
  translate->add_option("--out", tr_out, "output directory");
  translate->add_flag("--serial", tr_serial, "use the serial reference path");

  // qa
  auto* qa = app.add_subcommand("qa", "back-translation quality assurance");
  qa->fallthrough();
  std::string qa_dataset, qa_targets, qa_backend, qa_threshold, qa_out = "qa-report.md";
  std::string qa_workdir, qa_gen;
  bool qa_serial = false;
  qa->add_option("--dataset", qa_dataset, "English dataset manifest")->required();
  qa->add_option("--targets", qa_targets, "comma-separated pivot languages");
  qa->add_option("--backend", qa_backend, "translation backend URL or mock:");
  qa->add_option("--threshold", qa_threshold, "flag threshold in percentage points");
  qa->add_option("--out", qa_out, "report file");
  qa->add_option("--workdir", qa_workdir, "directory for round-tripped datasets");
  qa->add_option("--gen-backend", qa_gen,
                 "generation backend; enables accuracy-delta columns in the report");
  qa->add_flag("--serial", qa_serial, "use the serial reference path");

  // filter
  auto* filter = app.add_subcommand("filter", "similarity-filter image-text pairs");
  filter->fallthrough();
  std::string fl_manifest, fl_backend, fl_threshold, fl_min_chars, fl_out = "filtered";
  bool fl_serial = false;
  filter->add_option("--manifest", fl_manifest, "dataset manifest")->required();
  filter->add_option("--embed-backend", fl_backend, "embedding backend URL or mock:");
  filter->add_option("--threshold", fl_threshold, "similarity threshold (keep iff score >= t)");
  filter->add_option("--min-caption-chars", fl_min_chars, "stub caption heuristic; 0 disables");
  filter->add_option("--out", fl_out, "output directory");
  filter->add_flag("--serial", fl_serial, "use the serial reference path");

  // mix
  auto* mix = app.add_subcommand("mix", "compose training mixtures");
  mix->fallthrough();
  std::string mx_preset, mx_spec, mx_data = ".", mx_out = "mixtures";
  std::string mx_flores, mx_xsc;
  bool mx_virtual = false, mx_build_mtext = false;
  mix->add_option("--preset", mx_preset, "table2-row1 .. table2-row7");
  mix->add_option("--spec", mx_spec, "mixture spec file");
  mix->add_option("--data-dir", mx_data, "directory holding component manifests");
  mix->add_option("--out", mx_out, "output directory");
  mix->add_flag("--virtual", mx_virtual, "emit an index list instead of copying records");
  mix->add_flag("--build-mtext", mx_build_mtext, "combine Flores and XStoryCloze into MText");
  mix->add_option("--flores", mx_flores, "Flores manifest (with --build-mtext)");
  mix->add_option("--xstorycloze", mx_xsc, "XStoryCloze manifest (with --build-mtext)");

  // eval
  auto* eval = app.add_subcommand("eval", "score models on multiple-choice benchmarks");
  eval->fallthrough();
  std::vector<std::string> ev_items;
  std::string ev_backend, ev_template, ev_langs = "all", ev_out = "results", ev_max_tokens;
  bool ev_serial = false;
  eval->add_option("--items", ev_items, "eval item manifests")->required()->expected(-1);
  eval->add_option("--backend", ev_backend, "generation backend URL or mock:");
  eval->add_option("--template", ev_template, "prompt template file");
  eval->add_option("--langs", ev_langs, "language filter: all or comma-separated codes");
  eval->add_option("--out", ev_out, "output directory");
  eval->add_option("--max-tokens", ev_max_tokens, "generation budget per item");
  eval->add_flag("--serial", ev_serial, "use the serial reference path");

  // report
  auto* report = app.add_subcommand("report", "render a comparison table from eval results");
  report->fallthrough();
  std::vector<std::string> rp_results;
  std::string rp_labels, rp_out = "comparison.md";
  report->add_option("--results", rp_results, "result.json files")->required()->expected(-1);
  report->add_option("--labels", rp_labels, "comma-separated row labels");
  report->add_option("--out", rp_out, "output file");

  // validate-manifest
  auto* validate = app.add_subcommand("validate-manifest", "verify manifest integrity");
  validate->fallthrough();
  std::vector<std::string> vm_manifests;
  std::string vm_summary;
  validate->add_option("manifests", vm_manifests, "manifest files")->required()->expected(-1);
  validate->add_option("--summary", vm_summary, "write a run summary to this path");

  // serve
  auto* serve = app.add_subcommand("serve", "serve the deterministic mock backends over HTTP");
  serve->fallthrough();
  std::string sv_host = "127.0.0.1";
  int sv_port = 8090;
  serve->add_option("--host", sv_host, "bind address");
  serve->add_option("--port", sv_port, "port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitStatus::validation_failure);
  }

  try {
    if (!seed_arg.empty()) common.overrides["seed"] = seed_arg;
    if (!parallelism_arg.empty()) common.overrides["parallelism"] = parallelism_arg;

    if (*translate) {
      if (!tr_targets.empty()) common.overrides["languages"] = tr_targets;
      if (!tr_backend.empty()) common.overrides["translate_url"] = tr_backend;
      if (!tr_ckpt.empty()) common.overrides["checkpoint_dir"] = tr_ckpt;
      return run_translate(common, tr_manifest, tr_out, tr_serial);
    }
    if (*qa) {
      if (!qa_targets.empty()) common.overrides["languages"] = qa_targets;
      if (!qa_backend.empty()) common.overrides["translate_url"] = qa_backend;
      if (!qa_threshold.empty()) common.overrides["flag_threshold"] = qa_threshold;
      return run_qa(common, qa_dataset, qa_out, qa_workdir, qa_gen, qa_serial);
    }
    if (*filter) {
      if (!fl_backend.empty()) common.overrides["embed_url"] = fl_backend;
      if (!fl_threshold.empty()) common.overrides["similarity_threshold"] = fl_threshold;
      if (!fl_min_chars.empty()) common.overrides["min_caption_chars"] = fl_min_chars;
      return run_filter(common, fl_manifest, fl_out, fl_serial);
    }
    if (*mix) {
      if (mx_build_mtext && (mx_flores.empty() || mx_xsc.empty())) {
        throw ValidationError("--build-mtext needs --flores and --xstorycloze");
      }
      return run_mix(common, mx_preset, mx_spec, mx_data, mx_out, mx_virtual,
                     mx_build_mtext ? mx_flores : "", mx_build_mtext ? mx_xsc : "");
    }
    if (*eval) {
      if (!ev_backend.empty()) common.overrides["generate_url"] = ev_backend;
      if (!ev_max_tokens.empty()) common.overrides["max_tokens"] = ev_max_tokens;
      return run_eval_cmd(common, ev_items, ev_template, ev_langs, ev_out, ev_serial);
    }
    if (*report) return run_report(common, rp_results, rp_labels, rp_out);
    if (*validate) return run_validate(common, vm_manifests, vm_summary);
    if (*serve) return run_serve(common, sv_host, sv_port);
    return static_cast<int>(ExitStatus::validation_failure);
  } catch (const IntegrityError& e) {
    std::cerr << "m3pipe: integrity failure: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::integrity_failure);
  } catch (const TransportError& e) {
    std::cerr << "m3pipe: transport failure: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::transport_failure);
  } catch (const ProtocolError& e) {
    std::cerr << "m3pipe: protocol failure: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::transport_failure);
  } catch (const ValidationError& e) {
    std::cerr << "m3pipe: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::validation_failure);
  } catch (const std::exception& e) {
    std::cerr << "m3pipe: error: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::validation_failure);
  }
}
