#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prospect/query.hpp"
#include "prospect/topics.hpp"

namespace prospect {

/// One count per (keyword, topic, sequence) entry, keyed by turn index.
std::map<int, std::size_t> turn_distribution(std::span<const ProspectHit> hits);

/// "turn,count" CSV, LF line endings.
std::string histogram_csv(const std::map<int, std::size_t>& distribution);

enum class TableFormat { Markdown, Csv };
TableFormat parse_table_format(std::string_view name);

/// One row per (keyword, topic, sequence) with columns keyword, topic_id,
/// sequence, turn, speaker. CSV is RFC 4180 quoted with LF line endings.
std::string render_table(std::span<const ProspectHit> hits, TableFormat format);

/// Parses RFC 4180 CSV (LF or CRLF records) into rows of unescaped fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view csv);

void write_hits(std::span<const ProspectHit> hits, std::ostream& out);
std::vector<ProspectHit> read_hits(std::istream& in, const std::string& source);

inline constexpr int kModelArtifactVersion = 1;

/// Writes manifest.json, documents.jsonl, embeddings.bin, assignments.jsonl
/// and topics.json into `dir` (created if missing).
void export_model(const TopicModel& model, const std::filesystem::path& dir);

/// Reads an artifact directory and re-validates every model invariant,
/// including that stored topic words match the ones recomputed from the
/// documents and assignments.
TopicModel import_model(const std::filesystem::path& dir);

}  // namespace prospect
