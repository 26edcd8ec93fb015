#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "c2b/volgrid.hpp"

namespace c2b {

inline constexpr char kMniSpace[] = "MNI152";

struct StudyRecord {
  std::string id;
  std::string title;
  std::vector<PeakCoordinate> coordinates;
  std::string space = kMniSpace;

  /// Records without peaks are kept but cannot produce a meaningful target.
  bool has_peaks() const { return !coordinates.empty(); }
};

/// Ordered collection of studies with unique ids.
class Corpus {
 public:
  Corpus() = default;
  /// Throws InvalidArgument on an empty or duplicate id.
  explicit Corpus(std::vector<StudyRecord> records);

  void add(StudyRecord record);
  const std::vector<StudyRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const StudyRecord* find(const std::string& id) const;
  const StudyRecord& at(const std::string& id) const;

 private:
  std::vector<StudyRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct LineDiagnostic {
  std::size_t line = 0;  // 1-based
  std::string field;
  std::string message;
};

struct IngestResult {
  Corpus corpus;
  std::vector<LineDiagnostic> rejected;
  std::size_t records_without_peaks = 0;
};

/// Reads one JSON object per line: {"id", "title", "coordinates": [[x,y,z],...],
/// "space": "MNI152"}. Blank lines are skipped; malformed lines are rejected
/// with a diagnostic. A duplicate id throws InvalidArgument, an unreadable
/// file throws IoError.
IngestResult ingest_jsonl(const std::filesystem::path& path);
IngestResult ingest_jsonl_text(const std::string& text);

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path);
std::string to_jsonl(const Corpus& corpus);

}  // namespace c2b
