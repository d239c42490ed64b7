#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prospect {

enum class Speaker { User, System };

std::string_view to_string(Speaker speaker);
/// Accepts "USER"/"SYSTEM" in any case; throws SchemaError otherwise.
Speaker parse_speaker(std::string_view name);

using SlotValue = std::pair<std::string, std::string>;

struct AnnotationFrame {
  std::string domain;
  std::string intent;
  std::vector<SlotValue> slot_values;

  bool operator==(const AnnotationFrame&) const = default;
};

struct Turn {
  Speaker speaker = Speaker::User;
  std::string text;
  int turn_index = 0;
  std::vector<AnnotationFrame> annotations;

  bool operator==(const Turn&) const = default;
};

struct Dialogue {
  std::string dialogue_id;
  std::vector<Turn> turns;

  bool operator==(const Dialogue&) const = default;
};

enum class SourceFormat { Sgd, MultiWoz, Normalized };

std::string_view to_string(SourceFormat format);

/// An immutable set of dialogues, iterated in dialogue_id order.
///
/// The constructor enforces the structural invariants: unique ids, non-empty
/// dialogues, consecutive turn indices from 0, non-blank utterances and
/// control-character-free annotations. Violations raise SchemaError.
class Corpus {
 public:
  Corpus() = default;
  Corpus(SourceFormat format, std::vector<Dialogue> dialogues, std::string detected_shape = {});

  SourceFormat format() const { return format_; }
  /// Source layout the loader recognised, e.g. "sgd", "multiwoz-2.1".
  const std::string& detected_shape() const { return detected_shape_; }
  std::span<const Dialogue> dialogues() const { return dialogues_; }
  std::size_t size() const { return dialogues_.size(); }
  bool empty() const { return dialogues_.empty(); }
  std::size_t turn_count() const;

  /// Resolves a (dialogue, turn) pair; nullptr when absent.
  const Turn* find(std::string_view dialogue_id, int turn_index) const;

  /// Structural equality; ignores how the corpus was loaded.
  bool same_content(const Corpus& other) const { return dialogues_ == other.dialogues_; }

 private:
  SourceFormat format_ = SourceFormat::Normalized;
  std::string detected_shape_;
  std::vector<Dialogue> dialogues_;
};

/// Loads SGD dialogues from a JSON file or from every `*.json` file in a
/// directory (schema.json is skipped).
Corpus load_sgd(const std::filesystem::path& path);

/// Loads MultiWOZ 2.0/2.1 (`{name: {log: [...]}}`) or 2.2 (SGD-style turn
/// lists, file or directory). The recognised layout is kept in detected_shape().
Corpus load_multiwoz(const std::filesystem::path& path);

/// Reads the JSON-lines corpus written by write_normalized.
Corpus load_normalized(const std::filesystem::path& path);

void write_normalized(const Corpus& corpus, std::ostream& out);
void save_normalized(const Corpus& corpus, const std::filesystem::path& path);

/// Domain, intent and "slot value" pairs of every frame, joined with ", ".
std::string annotation_text(const Turn& turn);

}  // namespace prospect
