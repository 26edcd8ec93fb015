#include "c2b/split.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <json.hpp>

#include "c2b/binary_io.hpp"
#include "c2b/error.hpp"
#include "c2b/random.hpp"

namespace c2b {

using nlohmann::json;

std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::kTrain: return "train";
    case Partition::kVal: return "val";
    case Partition::kTest: return "test";
  }
  return "?";
}

Partition parse_partition(std::string_view s) {
  if (s == "train") return Partition::kTrain;
  if (s == "val") return Partition::kVal;
  if (s == "test") return Partition::kTest;
  throw InvalidArgument("unknown partition: " + std::string(s));
}

void SplitRatios::validate() const {
  for (double r : {train, val, test}) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("split ratios must be non-negative");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) throw InvalidArgument("split ratios must sum to 1");
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
  ratios.validate();
  // The small epsilon keeps products like 0.6 * 10 = 6.000000000000001 or
  // 0.29 * 100 = 28.999999999999996 on the intended integer.
  auto part = [n](double r) { return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9)); };
  std::array<std::size_t, 3> sizes{part(ratios.train), part(ratios.val), part(ratios.test)};
  std::size_t assigned = sizes[0] + sizes[1] + sizes[2];
  if (assigned > n) {  // only possible through the epsilon on tiny ratios
    sizes[2] -= std::min(sizes[2], assigned - n);
    assigned = sizes[0] + sizes[1] + sizes[2];
  }
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) sizes[1 + (i % 2)] += 1;
  return sizes;
}

SplitAssignment split_corpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed) {
  const auto sizes = split_sizes(corpus.size(), ratios);

  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& r : corpus.records()) ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());

  Rng rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(ids[i - 1], ids[j]);
  }

  SplitAssignment out;
  out.ratios = ratios;
  out.seed = seed;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Partition p = Partition::kTest;
    if (i < sizes[0]) {
      p = Partition::kTrain;
    } else if (i < sizes[0] + sizes[1]) {
      p = Partition::kVal;
    }
    out.assignment.emplace(ids[i], p);
  }
  return out;
}

std::vector<std::string> SplitAssignment::ids(Partition p) const {
  std::vector<std::string> out;
  for (const auto& [id, part] : assignment) {
    if (part == p) out.push_back(id);
  }
  return out;
}

std::size_t SplitAssignment::count(Partition p) const {
  return static_cast<std::size_t>(
      std::count_if(assignment.begin(), assignment.end(), [p](const auto& kv) { return kv.second == p; }));
}

std::string split_to_json(const SplitAssignment& split) {
  json assignment = json::object();
  for (const auto& [id, p] : split.assignment) assignment[id] = std::string(to_string(p));
  json obj = {{"ratios", {split.ratios.train, split.ratios.val, split.ratios.test}},
              {"seed", split.seed},
              {"assignment", assignment}};
  return obj.dump(1) + "\n";
}

SplitAssignment split_from_json(const std::string& text) {
  SplitAssignment out;
  try {
    const json obj = json::parse(text);
    const auto& r = obj.at("ratios");
    out.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    out.seed = obj.at("seed").get<std::uint64_t>();
    for (const auto& [id, p] : obj.at("assignment").items()) {
      out.assignment.emplace(id, parse_partition(p.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw FormatError("split", e.what());
  }
  return out;
}

void save_split(const SplitAssignment& split, const std::filesystem::path& path) {
  const std::string text = split_to_json(split);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

SplitAssignment load_split(const std::filesystem::path& path) {
  return split_from_json(read_file_text(path));
}

}  // namespace c2b
