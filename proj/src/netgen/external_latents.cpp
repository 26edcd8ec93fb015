#include <json.hpp>
#include <sstream>

#include "c2b/binary_io.hpp"
#include "c2b/error.hpp"
#include "c2b/trainer.hpp"

namespace c2b {

std::unordered_map<std::string, std::vector<float>> parse_external_latents(const std::string& text, int dim) {
  std::unordered_map<std::string, std::vector<float>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where, e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) throw FormatError(where, "missing string id");
    if (!j.contains("vector") || !j["vector"].is_array()) throw FormatError(where, "missing vector array");
    const auto& arr = j["vector"];
    if (arr.size() != static_cast<std::size_t>(dim)) {
      throw FormatError(where, "vector has " + std::to_string(arr.size()) + " values, expected " + std::to_string(dim));
    }
    std::vector<float> v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
      if (!x.is_number()) throw FormatError(where, "non-numeric vector entry");
      v.push_back(x.get<float>());
    }
    if (!out.emplace(j["id"].get<std::string>(), std::move(v)).second) {
      throw FormatError(where, "duplicate id " + j["id"].get<std::string>());
    }
  }
  return out;
}

std::unordered_map<std::string, std::vector<float>> load_external_latents(const std::filesystem::path& path, int dim) {
  return parse_external_latents(read_file_text(path), dim);
}

}  // namespace c2b
