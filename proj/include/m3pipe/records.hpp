#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "m3pipe/lang.hpp"

namespace m3pipe {

enum class Role { human, assistant, system };

std::string_view to_string(Role role);
Role parse_role(std::string_view role);

struct Turn {
  Role role = Role::human;
  std::string text;

  bool operator==(const Turn&) const = default;
};

// One image-text training instance. Images travel by reference only.
struct Sample {
  std::string id;
  Lang language = Lang::en;
  std::optional<std::string> image_ref;
  std::vector<Turn> turns;
  std::string source_dataset;
  std::map<std::string, std::string> meta;

  bool operator==(const Sample&) const = default;
};

// A parallel text pair (Flores / XStoryCloze).
struct TextPair {
  std::string id;
  Lang lang_a = Lang::en;
  Lang lang_b = Lang::zh;
  std::string text_a;
  std::string text_b;
  std::string source;  // "flores" | "xstorycloze"

  bool operator==(const TextPair&) const = default;
};

// One multiple-choice benchmark question.
struct EvalItem {
  std::string id;
  std::string subject;
  std::string question;
  std::vector<std::string> options;  // 2..26 entries
  int answer_index = 0;
  std::vector<std::string> image_refs;
  Lang language = Lang::en;

  bool operator==(const EvalItem&) const = default;
};

using Record = std::variant<Sample, TextPair, EvalItem>;

enum class RecordType { sample, text_pair, eval_item, mixed };

std::string_view to_string(RecordType type);
RecordType parse_record_type(std::string_view type);
RecordType record_type_of(const Record& record);

const std::string& record_id(const Record& record);

// Canonical JSON: sorted keys, compact separators, raw UTF-8. Serializing the
// same logical record always yields the same bytes.
nlohmann::json to_json(const Sample& sample);
nlohmann::json to_json(const TextPair& pair);
nlohmann::json to_json(const EvalItem& item);
nlohmann::json to_json(const Record& record);

Sample sample_from_json(const nlohmann::json& j);
TextPair text_pair_from_json(const nlohmann::json& j);
EvalItem eval_item_from_json(const nlohmann::json& j);

// Detects the record kind by its fields ("turns" / "text_a" / "options").
Record record_from_json(const nlohmann::json& j);

std::string record_to_line(const Record& record);
Record record_from_line(const std::string& line);

}  // namespace m3pipe
