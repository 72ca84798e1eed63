#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "m3pipe/manifest.hpp"

namespace m3pipe {

enum class SelectionMode { all, count, ratio };

struct ComponentSpec {
  std::string manifest_ref;  // path to a manifest (presets carry dataset names
                             // until the CLI resolves them against a data dir)
  SelectionMode mode = SelectionMode::all;
  std::uint64_t count = 0;  // mode == count
  double ratio = 1.0;       // mode == ratio, in (0, 1]
};

// A named, seeded recipe composing manifests into one training mixture.
struct MixtureSpec {
  std::string name;
  std::vector<ComponentSpec> components;
  std::uint64_t seed = 0;
};

struct StagePreset {
  std::string name;  // "table2-row1" .. "table2-row7"
  MixtureSpec stage2;
  std::optional<MixtureSpec> stage3;
};

// The seven Stage-2/Stage-3 data combinations, referencing components by
// dataset name (ccSBU, LAION, LAVAM, PALO, CI, CI_M, CT, CT_M, MText).
std::vector<StagePreset> stage_presets(std::uint64_t seed);

// Selection of k from n without replacement: a seeded Fisher-Yates shuffle
// of [0, n) (j = next() % (i+1), i from n-1 down to 1), then the first k
// slots in shuffle order. Sub-seeds come from one master splitmix64 stream
// seeded with the recipe seed: component c uses draw c, the final order
// shuffle uses draw |components|.
std::vector<std::uint64_t> fisher_yates_select(std::uint64_t n, std::uint64_t k,
                                               std::uint64_t sub_seed);

struct ComponentReport {
  std::string manifest;  // file name of the component manifest
  std::string dataset_name;
  std::string language;
  std::string mode;
  std::uint64_t available = 0;
  std::uint64_t selected = 0;
};

struct MixtureReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<ComponentReport> components;
  std::uint64_t total_selected = 0;
};

struct MixtureOptions {
  std::uint64_t shard_size = 10000;
  bool virtual_only = false;  // emit an index list instead of copying records
};

struct MixtureOutput {
  std::optional<Manifest> manifest;  // absent for virtual mixtures
  MixtureReport report;
  std::filesystem::path report_path;
  std::filesystem::path index_path;  // set for virtual mixtures
};

// Deterministic: depends only on (spec, seed, component contents). Selection
// indices run over each component's records pre-sorted by (dataset_name, id);
// final order is one global seeded shuffle. Output ids are qualified as
// "<dataset>.<lang>/<id>" and sample meta gains source_manifest provenance.
MixtureOutput build_mixture(const MixtureSpec& spec, const MixtureOptions& options,
                            const std::filesystem::path& output_dir);

// Flores + XStoryCloze concatenated, deduplicated by id (first wins),
// renamed MText. Inputs must be text_pair manifests.
Manifest build_mtext(const std::filesystem::path& flores_manifest,
                     const std::filesystem::path& xstorycloze_manifest,
                     const std::filesystem::path& output_dir, std::uint64_t shard_size);

// Expands dataset-name components into per-manifest components: every
// <dataset>.<lang>.manifest under data_dir, ordered by file name so the
// expansion never depends on directory enumeration order. A dataset with no
// manifest is an error.
MixtureSpec resolve_components(const MixtureSpec& spec, const std::filesystem::path& data_dir);

nlohmann::json to_json(const MixtureSpec& spec);
MixtureSpec mixture_spec_from_json(const nlohmann::json& j);
MixtureSpec load_mixture_spec(const std::filesystem::path& path);

}  // namespace m3pipe
