#include "m3pipe/records.hpp"

#include "m3pipe/errors.hpp"

namespace m3pipe {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::human: return "human";
    case Role::assistant: return "assistant";
    case Role::system: return "system";
  }
  return "human";
}

Role parse_role(std::string_view role) {
  if (role == "human") return Role::human;
  if (role == "assistant") return Role::assistant;
  if (role == "system") return Role::system;
  throw ValidationError("unknown turn role '" + std::string(role) + "'");
}

std::string_view to_string(RecordType type) {
  switch (type) {
    case RecordType::sample: return "sample";
    case RecordType::text_pair: return "text_pair";
    case RecordType::eval_item: return "eval_item";
    case RecordType::mixed: return "mixed";
  }
  return "sample";
}

RecordType parse_record_type(std::string_view type) {
  if (type == "sample") return RecordType::sample;
  if (type == "text_pair") return RecordType::text_pair;
  if (type == "eval_item") return RecordType::eval_item;
  if (type == "mixed") return RecordType::mixed;
  throw ValidationError("unknown record type '" + std::string(type) + "'");
}

RecordType record_type_of(const Record& record) {
  if (std::holds_alternative<Sample>(record)) return RecordType::sample;
  if (std::holds_alternative<TextPair>(record)) return RecordType::text_pair;
  return RecordType::eval_item;
}

const std::string& record_id(const Record& record) {
  return std::visit([](const auto& r) -> const std::string& { return r.id; }, record);
}

namespace {

std::string get_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw ValidationError(std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

void validate_sample(const Sample& s) {
  if (s.id.empty()) throw ValidationError("sample id must be non-empty");
  if (s.turns.empty()) throw ValidationError("sample '" + s.id + "' has no turns");
  for (const Turn& t : s.turns) {
    if (t.text.empty() && t.role != Role::system) {
      throw ValidationError("sample '" + s.id + "' has an empty non-system turn");
    }
  }
}

void validate_pair(const TextPair& p) {
  if (p.id.empty()) throw ValidationError("text pair id must be non-empty");
  if (p.lang_a == p.lang_b) {
    throw ValidationError("text pair '" + p.id + "' has identical languages");
  }
  if (p.text_a.empty() || p.text_b.empty()) {
    throw ValidationError("text pair '" + p.id + "' has an empty side");
  }
  if (p.source != "flores" && p.source != "xstorycloze") {
    throw ValidationError("text pair '" + p.id + "' has unknown source '" + p.source + "'");
  }
}

void validate_item(const EvalItem& e) {
  if (e.id.empty()) throw ValidationError("eval item id must be non-empty");
  if (e.options.size() < 2 || e.options.size() > 26) {
    throw ValidationError("eval item '" + e.id + "' must have 2..26 options, has " +
                          std::to_string(e.options.size()));
  }
  if (e.answer_index < 0 || static_cast<std::size_t>(e.answer_index) >= e.options.size()) {
    throw ValidationError("eval item '" + e.id + "' answer_index out of range");
  }
}

}  // namespace

json to_json(const Sample& sample) {
  json j;
  j["id"] = sample.id;
  j["language"] = std::string(to_string(sample.language));
  if (sample.image_ref) j["image_ref"] = *sample.image_ref;
  json turns = json::array();
  for (const Turn& t : sample.turns) {
    turns.push_back({{"role", std::string(to_string(t.role))}, {"text", t.text}});
  }
  j["turns"] = std::move(turns);
  j["source_dataset"] = sample.source_dataset;
  j["meta"] = sample.meta;
  return j;
}

json to_json(const TextPair& pair) {
  return json{{"id", pair.id},
              {"lang_a", std::string(to_string(pair.lang_a))},
              {"lang_b", std::string(to_string(pair.lang_b))},
              {"text_a", pair.text_a},
              {"text_b", pair.text_b},
              {"source", pair.source}};
}

json to_json(const EvalItem& item) {
  return json{{"id", item.id},
              {"subject", item.subject},
              {"question", item.question},
              {"options", item.options},
              {"answer_index", item.answer_index},
              {"image_refs", item.image_refs},
              {"language", std::string(to_string(item.language))}};
}

json to_json(const Record& record) {
  return std::visit([](const auto& r) { return to_json(r); }, record);
}

Sample sample_from_json(const json& j) {
  Sample s;
  s.id = get_string(j, "id");
  s.language = parse_lang(get_string(j, "language"));
  if (j.contains("image_ref") && !j["image_ref"].is_null()) {
    s.image_ref = j["image_ref"].get<std::string>();
  }
  auto turns = j.find("turns");
  if (turns == j.end() || !turns->is_array()) {
    throw ValidationError("sample is missing a 'turns' array");
  }
  for (const json& t : *turns) {
    s.turns.push_back(Turn{parse_role(get_string(t, "role")), get_string(t, "text")});
  }
  s.source_dataset = j.value("source_dataset", std::string());
  if (j.contains("meta")) {
    for (auto it = j["meta"].begin(); it != j["meta"].end(); ++it) {
      if (!it.value().is_string()) throw ValidationError("meta values must be strings");
      s.meta[it.key()] = it.value().get<std::string>();
    }
  }
  validate_sample(s);
  return s;
}

TextPair text_pair_from_json(const json& j) {
  TextPair p;
  p.id = get_string(j, "id");
  p.lang_a = parse_lang(get_string(j, "lang_a"));
  p.lang_b = parse_lang(get_string(j, "lang_b"));
  p.text_a = get_string(j, "text_a");
  p.text_b = get_string(j, "text_b");
  p.source = get_string(j, "source");
  validate_pair(p);
  return p;
}

EvalItem eval_item_from_json(const json& j) {
  EvalItem e;
  e.id = get_string(j, "id");
  e.subject = j.value("subject", std::string());
  e.question = get_string(j, "question");
  auto options = j.find("options");
  if (options == j.end() || !options->is_array()) {
    throw ValidationError("eval item is missing an 'options' array");
  }
  for (const json& o : *options) {
    if (!o.is_string()) throw ValidationError("options must be strings");
    e.options.push_back(o.get<std::string>());
  }
  if (!j.contains("answer_index") || !j["answer_index"].is_number_integer()) {
    throw ValidationError("eval item is missing integer 'answer_index'");
  }
  e.answer_index = j["answer_index"].get<int>();
  if (j.contains("image_refs")) {
    for (const json& r : j["image_refs"]) e.image_refs.push_back(r.get<std::string>());
  }
  e.language = parse_lang(get_string(j, "language"));
  validate_item(e);
  return e;
}

Record record_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("record is not an object");
  if (j.contains("turns")) return sample_from_json(j);
  if (j.contains("text_a")) return text_pair_from_json(j);
  if (j.contains("options")) return eval_item_from_json(j);
  throw ValidationError("record has none of the known shapes (turns/text_a/options)");
}

std::string record_to_line(const Record& record) { return to_json(record).dump(); }

Record record_from_line(const std::string& line) {
  json j = json::parse(line);  // nlohmann parse errors propagate as json::exception
  return record_from_json(j);
}

}  // namespace m3pipe
