#include "prospect/report.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "prospect/error.hpp"

namespace prospect {

using ojson = nlohmann::ordered_json;

std::map<int, std::size_t> turn_distribution(std::span<const ProspectHit> hits) {
  std::map<int, std::size_t> out;
  for (const auto& h : hits) {
    for (const auto& s : h.sequences) ++out[s.turn_index];
  }
  return out;
}

std::string histogram_csv(const std::map<int, std::size_t>& distribution) {
  std::string out = "turn,count\n";
  for (const auto& [turn, count] : distribution) {
    out += std::to_string(turn) + "," + std::to_string(count) + "\n";
  }
  return out;
}

TableFormat parse_table_format(std::string_view name) {
  if (name == "md" || name == "markdown") return TableFormat::Markdown;
  if (name == "csv") return TableFormat::Csv;
  throw ContractError("unknown table format '" + std::string(name) + "'");
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n' || c == '\r') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_table(std::span<const ProspectHit> hits, TableFormat format) {
  std::ostringstream out;
  if (format == TableFormat::Csv) {
    out << "keyword,topic_id,sequence,turn,speaker\n";
    for (const auto& h : hits) {
      for (const auto& s : h.sequences) {
        out << csv_field(h.keyword) << ',' << h.topic_id << ',' << csv_field(s.text) << ','
            << s.turn_index << ',' << to_string(s.speaker) << '\n';
      }
    }
  } else {
    out << "| keyword | topic_id | sequence | turn | speaker |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& h : hits) {
      for (const auto& s : h.sequences) {
        out << "| " << md_cell(h.keyword) << " | " << h.topic_id << " | " << md_cell(s.text)
            << " | " << s.turn_index << " | " << to_string(s.speaker) << " |\n";
      }
    }
  }
  return out.str();
}

std::vector<std::vector<std::string>> parse_csv(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    rows.push_back(std::move(row));
    row.clear();
    field_started = false;
  };
  while (i < csv.size()) {
    const char c = csv[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < csv.size() && csv[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    if (c == '"') {
      if (!field.empty()) throw ParseError("csv: quote inside an unquoted field");
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < csv.size() && csv[i + 1] == '\n') ++i;
      end_row();
    } else {
      field += c;
      field_started = true;
    }
    ++i;
  }
  if (quoted) throw ParseError("csv: unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

void write_hits(std::span<const ProspectHit> hits, std::ostream& out) {
  ojson arr = ojson::array();
  for (const auto& h : hits) {
    ojson obj;
    obj["keyword"] = h.keyword;
    obj["topic_id"] = h.topic_id;
    obj["score"] = h.score;
    obj["topic_words"] = h.topic_words;
    ojson seqs = ojson::array();
    for (const auto& s : h.sequences) {
      seqs.push_back({{"text", s.text},
                      {"dialogue_id", s.dialogue_id},
                      {"turn", s.turn_index},
                      {"speaker", to_string(s.speaker)}});
    }
    obj["sequences"] = std::move(seqs);
    arr.push_back(std::move(obj));
  }
  out << arr.dump(2) << '\n';
}

std::vector<ProspectHit> read_hits(std::istream& in, const std::string& source) {
  ojson arr;
  try {
    arr = ojson::parse(in);
  } catch (const ojson::parse_error& e) {
    throw ParseError(source + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!arr.is_array()) throw SchemaError(source + ": expected a JSON array of hits");
  std::vector<ProspectHit> hits;
  try {
    for (const auto& obj : arr) {
      ProspectHit h;
      h.keyword = obj.at("keyword").get<std::string>();
      h.topic_id = obj.at("topic_id").get<int>();
      h.score = obj.at("score").get<double>();
      h.topic_words = obj.at("topic_words").get<std::vector<std::string>>();
      for (const auto& s : obj.at("sequences")) {
        h.sequences.push_back({s.at("text").get<std::string>(),
                               s.at("dialogue_id").get<std::string>(), s.at("turn").get<int>(),
                               parse_speaker(s.at("speaker").get<std::string>())});
      }
      hits.push_back(std::move(h));
    }
  } catch (const ojson::exception& e) {
    throw SchemaError(source + ": " + e.what());
  }
  return hits;
}

}  // namespace prospect
