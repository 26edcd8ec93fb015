#include "c2b/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "c2b/error.hpp"

namespace c2b {

std::vector<double> canonical_retention() {
  std::vector<double> out;
  for (int p = 100; p >= 10; p -= 10) out.push_back(p / 100.0);
  return out;
}

VoxelMask::VoxelMask(std::array<int, 3> d, std::vector<std::uint8_t> b) : dims(d), bits(std::move(b)) {
  if (bits.size() != static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]) {
    throw InvalidArgument("mask length does not match its dims");
  }
}

std::size_t VoxelMask::count() const {
  std::size_t n = 0;
  for (auto b : bits) n += b != 0;
  return n;
}

std::size_t retained_count(double k, std::size_t n) {
  if (!(k > 0.0 && k <= 1.0)) throw InvalidArgument("retention fraction must lie in (0, 1]");
  return static_cast<std::size_t>(std::llround(k * static_cast<double>(n)));
}

VoxelMask topk_mask(std::span<const float> values, std::array<int, 3> dims, double k) {
  const std::size_t n = values.size();
  if (n != static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]) throw InvalidArgument("values do not match dims");
  const std::size_t keep = retained_count(k, n);
  for (float v : values) {
    if (std::isnan(v)) throw InvalidArgument("topk_mask: NaN value");
  }
  std::vector<std::uint8_t> bits(n, 0);
  if (keep >= n) {
    std::fill(bits.begin(), bits.end(), 1);
  } else if (keep > 0) {
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    auto before = [&](std::uint32_t a, std::uint32_t b) {
      return values[a] > values[b] || (values[a] == values[b] && a < b);
    };
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep - 1), idx.end(), before);
    for (std::size_t i = 0; i < keep; ++i) bits[idx[i]] = 1;
  }
  return VoxelMask(dims, std::move(bits));
}

VoxelMask topk_mask(const BrainVolume& volume, double k) { return topk_mask(volume.data, volume.grid.dims, k); }

namespace {

void check_pair(const VoxelMask& a, const VoxelMask& b) {
  if (a.dims != b.dims || a.bits.size() != b.bits.size()) throw InvalidArgument("mask dims differ");
}

struct Counts {
  std::size_t a = 0, b = 0, both = 0;
};

Counts count_pair(const VoxelMask& a, const VoxelMask& b) {
  check_pair(a, b);
  Counts c;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    const bool x = a.bits[i] != 0;
    const bool y = b.bits[i] != 0;
    c.a += x;
    c.b += y;
    c.both += x && y;
  }
  return c;
}

}  // namespace

double dice(const VoxelMask& a, const VoxelMask& b) {
  const auto c = count_pair(a, b);
  if (c.a + c.b == 0) return 1.0;
  return 2.0 * static_cast<double>(c.both) / static_cast<double>(c.a + c.b);
}

double iou(const VoxelMask& a, const VoxelMask& b) {
  const auto c = count_pair(a, b);
  const std::size_t uni = c.a + c.b - c.both;
  if (uni == 0) return 1.0;
  return static_cast<double>(c.both) / static_cast<double>(uni);
}

AucRanker::AucRanker(std::span<const float> scores) : ranks_(scores.size()) {
  for (float v : scores) {
    if (std::isnan(v)) throw InvalidArgument("auc: NaN score");
  }
  std::vector<std::uint32_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) { return scores[a] < scores[b]; });
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i + 1;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    // positions i..j-1 share the average of ranks i+1..j
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks_[idx[t]] = r;
    i = j;
  }
}

double AucRanker::auc(const VoxelMask& labels) const {
  if (labels.bits.size() != ranks_.size()) throw InvalidArgument("auc: scores and labels differ in length");
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < ranks_.size(); ++i) {
    if (labels.bits[i] != 0) {
      rank_sum += ranks_[i];
      ++pos;
    }
  }
  const std::size_t neg = ranks_.size() - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetric("auc: labels contain a single class");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double auc(std::span<const float> scores, const VoxelMask& labels) {
  if (scores.size() != labels.bits.size()) throw InvalidArgument("auc: scores and labels differ in length");
  return AucRanker(scores).auc(labels);
}

}  // namespace c2b
