#include "c2b/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "c2b/binary_io.hpp"
#include "c2b/error.hpp"

namespace c2b {

using nlohmann::json;

Corpus::Corpus(std::vector<StudyRecord> records) {
  records_.reserve(records.size());
  for (auto& r : records) add(std::move(r));
}

void Corpus::add(StudyRecord record) {
  if (record.id.empty()) throw InvalidArgument("study id must not be empty");
  if (by_id_.count(record.id) != 0) throw InvalidArgument("duplicate study id: " + record.id);
  by_id_.emplace(record.id, records_.size());
  records_.push_back(std::move(record));
}

const StudyRecord* Corpus::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

const StudyRecord& Corpus::at(const std::string& id) const {
  const auto* r = find(id);
  if (r == nullptr) throw InvalidArgument("unknown study id: " + id);
  return *r;
}

namespace {

struct LineError {
  std::string field;
  std::string message;
};

StudyRecord parse_record(const json& obj) {
  if (!obj.is_object()) throw LineError{"<line>", "expected a JSON object"};
  StudyRecord rec;

  auto it = obj.find("id");
  if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw LineError{"id", "missing or empty string"};
  }
  rec.id = it->get<std::string>();

  it = obj.find("title");
  if (it == obj.end() || !it->is_string()) throw LineError{"title", "missing or not a string"};
  rec.title = it->get<std::string>();

  it = obj.find("space");
  if (it == obj.end() || !it->is_string()) throw LineError{"space", "missing or not a string"};
  rec.space = it->get<std::string>();
  if (rec.space != kMniSpace) throw LineError{"space", "unsupported space '" + rec.space + "' (expected MNI152)"};

  it = obj.find("coordinates");
  if (it == obj.end() || !it->is_array()) throw LineError{"coordinates", "missing or not an array"};
  std::size_t i = 0;
  for (const auto& c : *it) {
    const std::string field = "coordinates[" + std::to_string(i) + "]";
    if (!c.is_array() || c.size() != 3) throw LineError{field, "expected an array of 3 numbers"};
    double v[3];
    for (int a = 0; a < 3; ++a) {
      if (!c[a].is_number()) throw LineError{field, "non-numeric component"};
      v[a] = c[a].get<double>();
      if (!std::isfinite(v[a])) throw LineError{field, "non-finite component"};
    }
    rec.coordinates.push_back({v[0], v[1], v[2]});
    ++i;
  }
  return rec;
}

}  // namespace

IngestResult ingest_jsonl_text(const std::string& text) {
  IngestResult result;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    StudyRecord rec;
    try {
      rec = parse_record(json::parse(line));
    } catch (const json::exception& e) {
      result.rejected.push_back({line_no, "<json>", e.what()});
      continue;
    } catch (const LineError& e) {
      result.rejected.push_back({line_no, e.field, e.message});
      continue;
    }
    if (result.corpus.find(rec.id) != nullptr) {
      throw InvalidArgument("duplicate study id '" + rec.id + "' at line " + std::to_string(line_no));
    }
    if (!rec.has_peaks()) ++result.records_without_peaks;
    result.corpus.add(std::move(rec));
  }
  return result;
}

IngestResult ingest_jsonl(const std::filesystem::path& path) {
  return ingest_jsonl_text(read_file_text(path));
}

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& r : corpus.records()) {
    json coords = json::array();
    for (const auto& c : r.coordinates) coords.push_back({c.x_mm, c.y_mm, c.z_mm});
    json obj = {{"id", r.id}, {"title", r.title}, {"coordinates", coords}, {"space", r.space}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  const std::string text = to_jsonl(corpus);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace c2b
