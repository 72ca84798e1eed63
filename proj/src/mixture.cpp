#include "m3pipe/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "m3pipe/errors.hpp"
#include "m3pipe/hash.hpp"
#include "m3pipe/shard_io.hpp"

namespace m3pipe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::all: return "all";
    case SelectionMode::count: return "count";
    case SelectionMode::ratio: return "ratio";
  }
  return "all";
}

MixtureSpec make_spec(std::string name, std::vector<std::string> datasets, std::uint64_t seed) {
  MixtureSpec spec;
  spec.name = std::move(name);
  spec.seed = seed;
  for (std::string& d : datasets) {
    spec.components.push_back(ComponentSpec{std::move(d), SelectionMode::all, 0, 1.0});
  }
  return spec;
}

const std::vector<std::string> kStage2Base = {"ccSBU", "LAION", "LAVAM", "PALO"};

std::vector<std::string> base_plus(const std::string& extra) {
  std::vector<std::string> out = kStage2Base;
  out.push_back(extra);
  return out;
}

}  // namespace

std::vector<StagePreset> stage_presets(std::uint64_t seed) {
  std::vector<StagePreset> presets;
  auto add = [&](int row, std::vector<std::string> stage2,
                 std::optional<std::vector<std::string>> stage3) {
    StagePreset p;
    p.name = "table2-row" + std::to_string(row);
    p.stage2 = make_spec(p.name + ".stage2", std::move(stage2), seed);
    if (stage3) p.stage3 = make_spec(p.name + ".stage3", std::move(*stage3), seed);
    presets.push_back(std::move(p));
  };
  add(1, kStage2Base, std::nullopt);
  add(2, base_plus("CI"), std::nullopt);
  add(3, base_plus("CI_M"), std::nullopt);
  add(4, base_plus("CI"), std::vector<std::string>{"CI_M", "CT_M", "MText"});
  add(5, base_plus("CI_M"), std::vector<std::string>{"CI_M", "CT_M", "MText"});
  add(6, base_plus("CI"), std::vector<std::string>{"CI", "CT"});
  add(7, base_plus("CI"), std::vector<std::string>{"CI", "CT", "MText"});
  return presets;
}

std::vector<std::uint64_t> fisher_yates_select(std::uint64_t n, std::uint64_t k,
                                               std::uint64_t sub_seed) {
  if (k > n) throw ValidationError("cannot select " + std::to_string(k) + " of " +
                                   std::to_string(n));
  std::vector<std::uint64_t> indices(n);
  for (std::uint64_t i = 0; i < n; ++i) indices[i] = i;
  SplitMix64 rng(sub_seed);
  for (std::uint64_t i = n; i > 1; --i) {
    std::uint64_t j = rng.next() % i;
    std::swap(indices[i - 1], indices[j]);
  }
  indices.resize(k);
  return indices;
}

namespace {

struct LoadedComponent {
  Manifest manifest;
  fs::path manifest_path;
  std::string qualifier;  // "<dataset>.<lang>"
  std::vector<std::uint64_t> selected;  // record positions, in shuffle order
  std::uint64_t available = 0;
};

std::uint64_t selection_size(const ComponentSpec& spec, std::uint64_t available,
                             const std::string& ref) {
  switch (spec.mode) {
    case SelectionMode::all:
      return available;
    case SelectionMode::count:
      if (spec.count > available) {
        throw ValidationError("component '" + ref + "' has " + std::to_string(available) +
                              " records, cannot select " + std::to_string(spec.count));
      }
      return spec.count;
    case SelectionMode::ratio:
      if (!(spec.ratio > 0.0) || spec.ratio > 1.0) {
        throw ValidationError("component '" + ref + "' ratio must be in (0, 1]");
      }
      return static_cast<std::uint64_t>(
          std::llround(spec.ratio * static_cast<double>(available)));
  }
  return available;
}

Record qualify(Record record, const std::string& qualifier, const std::string& manifest_name) {
  if (Sample* s = std::get_if<Sample>(&record)) {
    s->id = qualifier + "/" + s->id;
    s->meta["source_manifest"] = manifest_name;
  } else if (TextPair* p = std::get_if<TextPair>(&record)) {
    p->id = qualifier + "/" + p->id;
  } else {
    std::get<EvalItem>(record).id = qualifier + "/" + std::get<EvalItem>(record).id;
  }
  return record;
}

}  // namespace

MixtureOutput build_mixture(const MixtureSpec& spec, const MixtureOptions& options,
                            const fs::path& output_dir) {
  if (spec.name.empty()) throw ValidationError("mixture spec needs a name");
  if (spec.components.empty()) throw ValidationError("mixture spec has no components");
  {
    std::set<std::string> refs;
    for (const ComponentSpec& c : spec.components) {
      if (!refs.insert(c.manifest_ref).second) {
        throw ValidationError("duplicate component manifest '" + c.manifest_ref + "'");
      }
    }
  }
  fs::create_directories(output_dir);

  // Sub-seed assignment: one master stream, one draw per component in spec
  // order, then one draw for the global order shuffle.
  SplitMix64 master(spec.seed);
  std::vector<std::uint64_t> sub_seeds;
  for (std::size_t i = 0; i < spec.components.size(); ++i) sub_seeds.push_back(master.next());
  std::uint64_t order_seed = master.next();

  MixtureOutput output;
  output.report.name = spec.name;
  output.report.seed = spec.seed;

  std::vector<LoadedComponent> components;
  bool mixed_types = false;
  RecordType first_type = RecordType::sample;
  for (std::size_t c = 0; c < spec.components.size(); ++c) {
    const ComponentSpec& comp = spec.components[c];
    LoadedComponent loaded;
    loaded.manifest_path = comp.manifest_ref;
    loaded.manifest = load_manifest(loaded.manifest_path);
    loaded.qualifier = loaded.manifest.dataset_name + "." +
                       std::string(to_string(loaded.manifest.language));
    loaded.available = loaded.manifest.total_count;
    if (c == 0) {
      first_type = loaded.manifest.record_type;
    } else if (loaded.manifest.record_type != first_type) {
      mixed_types = true;
    }

    // Selection runs over positions pre-sorted by (dataset_name, id); within
    // one manifest the dataset name is constant, so the sort key is the id.
    std::vector<std::pair<std::string, std::uint64_t>> ids;
    ids.reserve(loaded.available);
    std::uint64_t position = 0;
    for_each_manifest_record(loaded.manifest_path, [&](Record&& rec) {
      ids.emplace_back(record_id(rec), position++);
    });
    std::sort(ids.begin(), ids.end());

    std::uint64_t k = selection_size(comp, loaded.available, comp.manifest_ref);
    std::vector<std::uint64_t> picks = fisher_yates_select(loaded.available, k, sub_seeds[c]);
    loaded.selected.reserve(picks.size());
    for (std::uint64_t rank : picks) loaded.selected.push_back(ids[rank].second);

    ComponentReport report;
    report.manifest = loaded.manifest_path.filename().string();
    report.dataset_name = loaded.manifest.dataset_name;
    report.language = std::string(to_string(loaded.manifest.language));
    report.mode = std::string(to_string(comp.mode));
    report.available = loaded.available;
    report.selected = k;
    output.report.components.push_back(std::move(report));
    output.report.total_selected += k;
    components.push_back(std::move(loaded));
  }

  // Global order: one seeded shuffle over all selected entries, which are
  // concatenated in (component, selection) order.
  std::vector<std::pair<std::uint32_t, std::uint64_t>> entries;
  entries.reserve(output.report.total_selected);
  for (std::uint32_t c = 0; c < components.size(); ++c) {
    for (std::uint64_t pos : components[c].selected) entries.emplace_back(c, pos);
  }
  std::vector<std::uint64_t> order =
      fisher_yates_select(entries.size(), entries.size(), order_seed);

  json report_json{{"name", output.report.name},
                   {"seed", output.report.seed},
                   {"total_selected", output.report.total_selected}};
  {
    json comps = json::array();
    for (const ComponentReport& r : output.report.components) {
      comps.push_back({{"manifest", r.manifest},
                       {"dataset_name", r.dataset_name},
                       {"language", r.language},
                       {"mode", r.mode},
                       {"available", r.available},
                       {"selected", r.selected}});
    }
    report_json["components"] = std::move(comps);
  }

  if (options.virtual_only) {
    json index{{"name", spec.name}, {"seed", spec.seed}};
    json comps = json::array();
    for (std::size_t c = 0; c < components.size(); ++c) {
      comps.push_back({{"manifest", components[c].manifest_path.string()},
                       {"selected_positions", components[c].selected}});
    }
    index["components"] = std::move(comps);
    json order_json = json::array();
    for (std::uint64_t e : order) {
      order_json.push_back({entries[e].first, entries[e].second});
    }
    index["order"] = std::move(order_json);
    output.index_path = output_dir / (spec.name + ".index.json");
    std::ofstream out(output.index_path, std::ios::binary | std::ios::trunc);
    out << index.dump(2) << "\n";
    if (!out) throw Error("I/O failure writing " + output.index_path.string());
  } else {
    // Materialize: keep only selected records in memory, keyed by position.
    std::vector<std::unordered_map<std::uint64_t, Record>> held(components.size());
    for (std::size_t c = 0; c < components.size(); ++c) {
      std::set<std::uint64_t> wanted(components[c].selected.begin(),
                                     components[c].selected.end());
      std::uint64_t position = 0;
      for_each_manifest_record(components[c].manifest_path, [&](Record&& rec) {
        if (wanted.count(position) != 0) held[c].emplace(position, std::move(rec));
        ++position;
      });
    }
    DatasetWriter writer(output_dir, spec.name, Lang::en,
                         mixed_types ? RecordType::mixed : first_type, options.shard_size);
    for (std::uint64_t e : order) {
      auto [c, pos] = entries[e];
      const LoadedComponent& comp = components[c];
      writer.add(qualify(std::move(held[c].at(pos)), comp.qualifier,
                         comp.manifest.file_name()));
    }
    output.manifest = writer.finish();
  }

  output.report_path = output_dir / (spec.name + ".composition.json");
  std::ofstream report_out(output.report_path, std::ios::binary | std::ios::trunc);
  report_out << report_json.dump(2) << "\n";
  if (!report_out) throw Error("I/O failure writing " + output.report_path.string());
  return output;
}

Manifest build_mtext(const fs::path& flores_manifest, const fs::path& xstorycloze_manifest,
                     const fs::path& output_dir, std::uint64_t shard_size) {
  Manifest flores = load_manifest(flores_manifest);
  Manifest xsc = load_manifest(xstorycloze_manifest);
  if (flores.record_type != RecordType::text_pair) {
    throw ValidationError("MText input '" + flores.dataset_name +
                          "' is not a text_pair dataset");
  }
  if (xsc.record_type != RecordType::text_pair) {
    throw ValidationError("MText input '" + xsc.dataset_name + "' is not a text_pair dataset");
  }
  DatasetWriter writer(output_dir, "MText", Lang::en, RecordType::text_pair, shard_size);
  std::unordered_set<std::string> seen_ids;
  auto append = [&](const fs::path& manifest_path) {
    for_each_manifest_record(manifest_path, [&](Record&& rec) {
      if (seen_ids.insert(record_id(rec)).second) writer.add(rec);
    });
  };
  append(flores_manifest);
  append(xstorycloze_manifest);
  return writer.finish();
}

MixtureSpec resolve_components(const MixtureSpec& spec, const fs::path& data_dir) {
  MixtureSpec resolved;
  resolved.name = spec.name;
  resolved.seed = spec.seed;
  for (const ComponentSpec& comp : spec.components) {
    std::vector<fs::path> matches;
    if (fs::exists(data_dir)) {
      for (const auto& entry : fs::directory_iterator(data_dir)) {
        const fs::path& p = entry.path();
        if (p.extension() != ".manifest") continue;
        if (p.filename().string().rfind(comp.manifest_ref + ".", 0) == 0) {
          matches.push_back(p);
        }
      }
    }
    if (matches.empty()) {
      throw ValidationError("no manifests for dataset '" + comp.manifest_ref + "' under " +
                            data_dir.string());
    }
    std::sort(matches.begin(), matches.end());
    for (const fs::path& m : matches) {
      ComponentSpec c = comp;
      c.manifest_ref = m.string();
      resolved.components.push_back(std::move(c));
    }
  }
  return resolved;
}

json to_json(const MixtureSpec& spec) {
  json comps = json::array();
  for (const ComponentSpec& c : spec.components) {
    json j{{"manifest", c.manifest_ref}, {"mode", std::string(to_string(c.mode))}};
    if (c.mode == SelectionMode::count) j["count"] = c.count;
    if (c.mode == SelectionMode::ratio) j["ratio"] = c.ratio;
    comps.push_back(std::move(j));
  }
  return json{{"name", spec.name}, {"seed", spec.seed}, {"components", std::move(comps)}};
}

MixtureSpec mixture_spec_from_json(const json& j) {
  MixtureSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  for (const json& c : j.at("components")) {
    ComponentSpec comp;
    comp.manifest_ref = c.at("manifest").get<std::string>();
    std::string mode = c.value("mode", "all");
    if (mode == "all") {
      comp.mode = SelectionMode::all;
    } else if (mode == "count") {
      comp.mode = SelectionMode::count;
      comp.count = c.at("count").get<std::uint64_t>();
    } else if (mode == "ratio") {
      comp.mode = SelectionMode::ratio;
      comp.ratio = c.at("ratio").get<double>();
    } else {
      throw ValidationError("unknown selection mode '" + mode + "'");
    }
    spec.components.push_back(std::move(comp));
  }
  return spec;
}

MixtureSpec load_mixture_spec(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open mixture spec " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("mixture spec " + path.string() + " does not parse: " + e.what());
  }
  return mixture_spec_from_json(j);
}

}  // namespace m3pipe
