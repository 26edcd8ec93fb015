#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "c2b/volgrid.hpp"

namespace c2b {

/// Canonical retention sweep 1.0, 0.9, ..., 0.1.
std::vector<double> canonical_retention();

/// Binary voxel mask, x-fastest like BrainVolume.
struct VoxelMask {
  std::array<int, 3> dims{0, 0, 0};
  std::vector<std::uint8_t> bits;

  VoxelMask() = default;
  VoxelMask(std::array<int, 3> d, std::vector<std::uint8_t> b);
  std::size_t size() const { return bits.size(); }
  std::size_t count() const;
  bool operator==(const VoxelMask&) const = default;
};

/// round(k * n) with halves rounded away from zero. Throws InvalidArgument
/// unless 0 < k <= 1.
std::size_t retained_count(double k, std::size_t n);

/// Keeps the round(k*N) highest values; ties at the cutoff go to the lower
/// linear index. Throws InvalidArgument for k outside (0, 1] or NaN values.
VoxelMask topk_mask(std::span<const float> values, std::array<int, 3> dims, double k);
VoxelMask topk_mask(const BrainVolume& volume, double k);

/// 2|A∩B| / (|A|+|B|); 1 when both are empty. Throws InvalidArgument on a
/// dims mismatch.
double dice(const VoxelMask& a, const VoxelMask& b);
/// |A∩B| / |A∪B|; 1 when both are empty.
double iou(const VoxelMask& a, const VoxelMask& b);

/// Mann-Whitney AUC of `scores` against `labels` with average ranks for
/// ties. Throws UndefinedMetric when all labels agree, InvalidArgument on a
/// length mismatch.
double auc(std::span<const float> scores, const VoxelMask& labels);

/// Ranks computed once for many label sets over the same scores.
class AucRanker {
 public:
  explicit AucRanker(std::span<const float> scores);
  double auc(const VoxelMask& labels) const;

 private:
  std::vector<double> ranks_;  // 1-based average ranks
};

/// Each token is replaced by "mask" with probability `rate`, drawn from a
/// generator seeded with `seed`. Throws InvalidArgument unless 0 <= rate <= 1.
std::vector<std::string> mask_tokens(const std::vector<std::string>& tokens, double rate, std::uint64_t seed);

inline constexpr char kMaskToken[] = "mask";

}  // namespace c2b
