#include <fstream>
#include <sstream>

#include <json.hpp>

#include "c2b/augment.hpp"
#include "c2b/error.hpp"

namespace c2b {

using nlohmann::json;

AugCache::AugCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(*path_);
  if (!in) return;  // cold cache
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json obj = json::parse(line);
      Entry e{obj.at("study_id").get<std::string>(),
              parse_aug_variant(obj.at("kind").get<std::string>()),
              obj.at("prompt_hash").get<std::string>(),
              obj.at("completion").get<std::string>(),
              obj.value("client", ""),
              obj.value("timestamp", "")};
      entries_[key(e.study_id, e.kind, e.prompt_hash)] = std::move(e);
    } catch (const std::exception& ex) {
      throw FormatError("aug cache line " + std::to_string(line_no), ex.what());
    }
  }
}

std::string AugCache::key(const std::string& study_id, AugVariantKind kind, const std::string& prompt_hash) {
  return study_id + '\x1f' + std::string(to_string(kind)) + '\x1f' + prompt_hash;
}

std::optional<AugCache::Entry> AugCache::get(const std::string& study_id, AugVariantKind kind,
                                             const std::string& prompt_hash) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key(study_id, kind, prompt_hash));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void AugCache::put(const Entry& entry) {
  std::unique_lock lock(mutex_);
  entries_[key(entry.study_id, entry.kind, entry.prompt_hash)] = entry;
  if (!path_) return;
  std::ofstream out(*path_, std::ios::app);
  if (!out) throw IoError("cannot append to cache: " + path_->string());
  const json obj = {{"study_id", entry.study_id},       {"kind", std::string(to_string(entry.kind))},
                    {"prompt_hash", entry.prompt_hash}, {"completion", entry.completion},
                    {"client", entry.client_id},        {"timestamp", entry.timestamp}};
  out << obj.dump() << '\n';
  if (!out) throw IoError("cache write failed: " + path_->string());
}

std::size_t AugCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace c2b
