#include "prospect/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "prospect/error.hpp"
#include "prospect/text.hpp"

namespace prospect {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Speaker speaker) {
  return speaker == Speaker::User ? "USER" : "SYSTEM";
}

Speaker parse_speaker(std::string_view name) {
  const auto lower = text::to_lower(name);
  if (lower == "user") return Speaker::User;
  if (lower == "system") return Speaker::System;
  throw SchemaError("unknown speaker '" + std::string(name) + "'");
}

std::string_view to_string(SourceFormat format) {
  switch (format) {
    case SourceFormat::Sgd:
      return "sgd";
    case SourceFormat::MultiWoz:
      return "multiwoz";
    case SourceFormat::Normalized:
      return "normalized";
  }
  return "unknown";
}

namespace {

void validate_frame(const AnnotationFrame& frame, const std::string& where) {
  auto check = [&](const std::string& field) {
    if (text::has_control_chars(field)) {
      throw SchemaError(where + ": annotation contains control characters");
    }
  };
  check(frame.domain);
  check(frame.intent);
  for (const auto& [slot, value] : frame.slot_values) {
    check(slot);
    check(value);
  }
}

void validate_dialogue(const Dialogue& d) {
  if (d.dialogue_id.empty()) throw SchemaError("dialogue with empty dialogue_id");
  if (d.turns.empty()) throw SchemaError("dialogue '" + d.dialogue_id + "' has no turns");
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const auto& t = d.turns[i];
    const std::string where = d.dialogue_id + " turn " + std::to_string(i);
    if (t.turn_index != static_cast<int>(i)) {
      throw SchemaError(where + ": turn_index " + std::to_string(t.turn_index) +
                        " is not consecutive");
    }
    if (text::trim(t.text).empty()) throw SchemaError(where + ": blank utterance");
    for (const auto& f : t.annotations) validate_frame(f, where);
  }
}

}  // namespace

Corpus::Corpus(SourceFormat format, std::vector<Dialogue> dialogues, std::string detected_shape)
    : format_(format), detected_shape_(std::move(detected_shape)), dialogues_(std::move(dialogues)) {
  std::sort(dialogues_.begin(), dialogues_.end(),
            [](const Dialogue& a, const Dialogue& b) { return a.dialogue_id < b.dialogue_id; });
  for (std::size_t i = 0; i < dialogues_.size(); ++i) {
    validate_dialogue(dialogues_[i]);
    if (i > 0 && dialogues_[i].dialogue_id == dialogues_[i - 1].dialogue_id) {
      throw SchemaError("duplicate dialogue_id '" + dialogues_[i].dialogue_id + "'");
    }
  }
}

std::size_t Corpus::turn_count() const {
  std::size_t n = 0;
  for (const auto& d : dialogues_) n += d.turns.size();
  return n;
}

const Turn* Corpus::find(std::string_view dialogue_id, int turn_index) const {
  auto it = std::lower_bound(
      dialogues_.begin(), dialogues_.end(), dialogue_id,
      [](const Dialogue& d, std::string_view id) { return d.dialogue_id < id; });
  if (it == dialogues_.end() || it->dialogue_id != dialogue_id) return nullptr;
  if (turn_index < 0 || turn_index >= static_cast<int>(it->turns.size())) return nullptr;
  return &it->turns[static_cast<std::size_t>(turn_index)];
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ojson parse_json(const std::string& content, const fs::path& file) {
  try {
    return ojson::parse(content);
  } catch (const ojson::parse_error& e) {
    throw ParseError(file.string() + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

// Accessors that name the offending JSON path on failure.
class Node {
 public:
  Node(const ojson& value, std::string path, const fs::path& file)
      : value_(value), path_(std::move(path)), file_(file) {}

  const ojson& value() const { return value_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError(file_.string() + ": " + path_ + ": " + what);
  }

  bool has(const char* key) const { return value_.is_object() && value_.contains(key); }

  Node at(const char* key) const {
    if (!value_.is_object()) fail("expected an object");
    auto it = value_.find(key);
    if (it == value_.end()) {
      Node(value_, path_ + "." + key, file_).fail("missing required field");
    }
    return Node(*it, path_ + "." + key, file_);
  }

  Node at(std::size_t i) const {
    return Node(value_.at(i), path_ + "[" + std::to_string(i) + "]", file_);
  }

  std::string str() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  const ojson& array() const {
    if (!value_.is_array()) fail("expected an array");
    return value_;
  }

  const ojson& object() const {
    if (!value_.is_object()) fail("expected an object");
    return value_;
  }

 private:
  const ojson& value_;
  std::string path_;
  const fs::path& file_;
};

void push_unique(std::vector<SlotValue>& out, SlotValue sv) {
  if (std::find(out.begin(), out.end(), sv) == out.end()) out.push_back(std::move(sv));
}

// SGD frame: service -> domain, state.active_intent -> intent, and the union
// of state.slot_values with the slot/values of every action.
AnnotationFrame parse_sgd_frame(const Node& frame) {
  AnnotationFrame out;
  out.domain = frame.at("service").str();
  if (frame.has("state")) {
    const Node state = frame.at("state");
    if (state.has("active_intent")) out.intent = state.at("active_intent").str();
    if (state.has("slot_values")) {
      const Node slots = state.at("slot_values");
      for (const auto& [slot, values] : slots.object().items()) {
        if (values.is_string()) {
          push_unique(out.slot_values, {slot, values.get<std::string>()});
          continue;
        }
        const Node vals = slots.at(slot.c_str());
        for (std::size_t i = 0; i < vals.array().size(); ++i) {
          push_unique(out.slot_values, {slot, vals.at(i).str()});
        }
      }
    }
  }
  if (frame.has("actions")) {
    const Node actions = frame.at("actions");
    for (std::size_t i = 0; i < actions.array().size(); ++i) {
      const Node action = actions.at(i);
      action.object();
      std::string slot = action.has("slot") ? action.at("slot").str() : std::string{};
      std::vector<std::string> values;
      if (action.has("values")) {
        const Node vals = action.at("values");
        for (std::size_t j = 0; j < vals.array().size(); ++j) values.push_back(vals.at(j).str());
      }
      if (values.empty()) {
        if (!slot.empty()) push_unique(out.slot_values, {slot, ""});
      } else {
        for (auto& v : values) push_unique(out.slot_values, {slot, std::move(v)});
      }
    }
  }
  return out;
}

// Parses an array of SGD-style dialogues (also the MultiWOZ 2.2 layout).
void parse_sgd_dialogues(const ojson& root, const fs::path& file, std::vector<Dialogue>& out) {
  const Node top(root, "$", file);
  const auto& arr = top.array();
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const Node dnode = top.at(i);
    Dialogue d;
    d.dialogue_id = dnode.at("dialogue_id").str();
    const Node turns = dnode.at("turns");
    if (turns.array().empty()) turns.fail("dialogue has no turns");
    for (std::size_t t = 0; t < turns.array().size(); ++t) {
      const Node tnode = turns.at(t);
      Turn turn;
      const Node speaker = tnode.at("speaker");
      try {
        turn.speaker = parse_speaker(speaker.str());
      } catch (const SchemaError&) {
        speaker.fail("speaker must be USER or SYSTEM");
      }
      const Node utterance = tnode.at("utterance");
      turn.text = utterance.str();
      if (text::trim(turn.text).empty()) utterance.fail("blank utterance");
      turn.turn_index = static_cast<int>(t);
      const Node frames = tnode.at("frames");
      for (std::size_t f = 0; f < frames.array().size(); ++f) {
        const Node fnode = frames.at(f);
        auto frame = parse_sgd_frame(fnode);
        validate_frame(frame, file.string() + ": " + fnode.path());
        turn.annotations.push_back(std::move(frame));
      }
      d.turns.push_back(std::move(turn));
    }
    out.push_back(std::move(d));
  }
}

std::vector<fs::path> json_files(const fs::path& path, std::initializer_list<std::string_view> skip) {
  if (!fs::exists(path)) throw IoError("path does not exist: '" + path.string() + "'");
  if (!fs::is_directory(path)) return {path};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    const auto name = entry.path().filename().string();
    if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .json files in '" + path.string() + "'");
  return files;
}

// MultiWOZ "Domain-Act" key; keys without a dash are taken as a bare act.
AnnotationFrame parse_multiwoz_act(const std::string& key, const Node& args) {
  AnnotationFrame frame;
  const auto dash = key.find('-');
  if (dash == std::string::npos) {
    frame.intent = key;
  } else {
    frame.domain = key.substr(0, dash);
    frame.intent = key.substr(dash + 1);
  }
  for (std::size_t i = 0; i < args.array().size(); ++i) {
    const Node pair = args.at(i);
    const auto& arr = pair.array();
    if (arr.size() != 2) pair.fail("expected a [slot, value] pair");
    auto scalar = [&](std::size_t j) {
      const Node v = pair.at(j);
      if (v.value().is_string()) return v.str();
      if (v.value().is_number()) return v.value().dump();
      v.fail("expected a string");
    };
    frame.slot_values.emplace_back(scalar(0), scalar(1));
  }
  return frame;
}

}  // namespace

Corpus load_sgd(const fs::path& path) {
  std::vector<Dialogue> dialogues;
  for (const auto& file : json_files(path, {"schema.json"})) {
    parse_sgd_dialogues(parse_json(read_file(file), file), file, dialogues);
  }
  spdlog::debug("loaded {} SGD dialogues from {}", dialogues.size(), path.string());
  return Corpus(SourceFormat::Sgd, std::move(dialogues), "sgd");
}

Corpus load_multiwoz(const fs::path& path) {
  std::vector<Dialogue> dialogues;
  std::string shape;
  for (const auto& file : json_files(path, {"schema.json", "dialog_acts.json"})) {
    const ojson root = parse_json(read_file(file), file);
    if (root.is_array()) {
      parse_sgd_dialogues(root, file, dialogues);
      shape = "multiwoz-2.2";
      continue;
    }
    const Node top(root, "$", file);
    bool saw_dialog_act = false;
    for (const auto& [name, body] : top.object().items()) {
      const Node dnode(body, "$." + name, file);
      const Node log = dnode.at("log");
      const auto& entries = log.array();
      if (entries.empty()) log.fail("empty log");
      Dialogue d;
      d.dialogue_id = name;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const Node entry = log.at(i);
        Turn turn;
        turn.speaker = (i % 2 == 0) ? Speaker::User : Speaker::System;
        turn.turn_index = static_cast<int>(i);
        const Node textnode = entry.at("text");
        turn.text = textnode.str();
        if (text::trim(turn.text).empty()) textnode.fail("blank utterance");
        // User turns carry empty metadata; a filled one on an even index means
        // the log does not alternate USER/SYSTEM.
        if (entry.has("metadata")) {
          const auto& meta = entry.at("metadata").value();
          if (turn.speaker == Speaker::User && meta.is_object() && !meta.empty()) {
            entry.fail("non-alternating log: system metadata on a user turn");
          }
        }
        if (entry.has("dialog_act")) {
          saw_dialog_act = true;
          const Node acts = entry.at("dialog_act");
          if (acts.value().is_object()) {
            for (const auto& [key, args] : acts.value().items()) {
              auto frame = parse_multiwoz_act(key, Node(args, acts.path() + "." + key, file));
              validate_frame(frame, file.string() + ": " + acts.path());
              turn.annotations.push_back(std::move(frame));
            }
          }
        }
        d.turns.push_back(std::move(turn));
      }
      dialogues.push_back(std::move(d));
    }
    if (shape != "multiwoz-2.2") shape = saw_dialog_act ? "multiwoz-2.1" : "multiwoz-2.0";
  }
  spdlog::debug("loaded {} MultiWOZ dialogues ({}) from {}", dialogues.size(), shape,
                path.string());
  return Corpus(SourceFormat::MultiWoz, std::move(dialogues), shape);
}

Corpus load_normalized(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<Dialogue> dialogues;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    ojson obj;
    try {
      obj = ojson::parse(line);
    } catch (const ojson::parse_error& e) {
      throw ParseError(path.string() + ": line " + std::to_string(lineno) + ": byte " +
                       std::to_string(e.byte) + ": " + e.what());
    }
    const Node top(obj, "line " + std::to_string(lineno), path);
    Dialogue d;
    d.dialogue_id = top.at("dialogue_id").str();
    const Node turns = top.at("turns");
    for (std::size_t t = 0; t < turns.array().size(); ++t) {
      const Node tnode = turns.at(t);
      Turn turn;
      try {
        turn.speaker = parse_speaker(tnode.at("speaker").str());
      } catch (const SchemaError& e) {
        tnode.fail(e.what());
      }
      const Node idx = tnode.at("turn_index");
      if (!idx.value().is_number_integer()) idx.fail("expected an integer");
      turn.turn_index = idx.value().get<int>();
      turn.text = tnode.at("text").str();
      const Node anns = tnode.at("annotations");
      for (std::size_t a = 0; a < anns.array().size(); ++a) {
        const Node anode = anns.at(a);
        AnnotationFrame frame;
        frame.domain = anode.at("domain").str();
        frame.intent = anode.at("intent").str();
        const Node svs = anode.at("slot_values");
        for (std::size_t s = 0; s < svs.array().size(); ++s) {
          const Node pair = svs.at(s);
          if (pair.array().size() != 2) pair.fail("expected a [slot, value] pair");
          frame.slot_values.emplace_back(pair.at(std::size_t{0}).str(),
                                         pair.at(std::size_t{1}).str());
        }
        turn.annotations.push_back(std::move(frame));
      }
      d.turns.push_back(std::move(turn));
    }
    dialogues.push_back(std::move(d));
  }
  return Corpus(SourceFormat::Normalized, std::move(dialogues), "normalized");
}

void write_normalized(const Corpus& corpus, std::ostream& out) {
  for (const auto& d : corpus.dialogues()) {
    ojson obj;
    obj["dialogue_id"] = d.dialogue_id;
    ojson turns = ojson::array();
    for (const auto& t : d.turns) {
      ojson turn;
      turn["speaker"] = to_string(t.speaker);
      turn["turn_index"] = t.turn_index;
      turn["text"] = t.text;
      ojson anns = ojson::array();
      for (const auto& f : t.annotations) {
        ojson frame;
        frame["domain"] = f.domain;
        frame["intent"] = f.intent;
        ojson svs = ojson::array();
        for (const auto& [slot, value] : f.slot_values) svs.push_back(ojson::array({slot, value}));
        frame["slot_values"] = std::move(svs);
        anns.push_back(std::move(frame));
      }
      turn["annotations"] = std::move(anns);
      turns.push_back(std::move(turn));
    }
    obj["turns"] = std::move(turns);
    out << obj.dump() << '\n';
  }
}

void save_normalized(const Corpus& corpus, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_normalized(corpus, out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string annotation_text(const Turn& turn) {
  std::vector<std::string> parts;
  for (const auto& f : turn.annotations) {
    if (!f.domain.empty()) parts.push_back(f.domain);
    if (!f.intent.empty()) parts.push_back(f.intent);
    for (const auto& [slot, value] : f.slot_values) {
      if (slot.empty() && value.empty()) continue;
      if (slot.empty()) {
        parts.push_back(value);
      } else if (value.empty()) {
        parts.push_back(slot);
      } else {
        parts.push_back(slot + " " + value);
      }
    }
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ", ";
    out += parts[i];
  }
  return out;
}

}  // namespace prospect
