#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "c2b/corpus.hpp"

namespace c2b {

enum class Partition { kTrain, kVal, kTest };

std::string_view to_string(Partition p);
Partition parse_partition(std::string_view s);

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;

  /// Non-negative and summing to 1 within 1e-9, else InvalidArgument.
  void validate() const;
};

struct SplitAssignment {
  SplitRatios ratios;
  std::uint64_t seed = 0;
  std::map<std::string, Partition> assignment;

  /// Ids in the given partition, in ascending id order.
  std::vector<std::string> ids(Partition p) const;
  std::size_t count(Partition p) const;
};

/// Sorts the ids, applies a Fisher-Yates shuffle driven by mt19937_64(seed)
/// with rejection-sampled bounded draws, then cuts the shuffled order into
/// train | val | test. Sizes are floor(ratio * N) each; the leftover records
/// go to val, test, val, ... in turn.
SplitAssignment split_corpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

/// Partition sizes for N records under the rule above.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

std::string split_to_json(const SplitAssignment& split);
SplitAssignment split_from_json(const std::string& text);
void save_split(const SplitAssignment& split, const std::filesystem::path& path);
SplitAssignment load_split(const std::filesystem::path& path);

}  // namespace c2b
