#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "c2b/netgen.hpp"
#include "c2b/optimizer.hpp"
#include "c2b/volgrid.hpp"

namespace c2b {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 4;
  AdamWConfig optim;
  EncoderConfig encoder;
  std::uint64_t seed = 0;
  /// Worker threads for per-sample gradients; results do not depend on it.
  int threads = 1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainLog {
  std::vector<double> epoch_loss;  // mean step MSE per epoch
  bool operator==(const TrainLog&) const = default;
};

struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  GridSpec grid;
  ModelParams<float> params;
  std::optional<OptimizerState<float>> optimizer;
  TrainConfig config;
  TrainLog log;

  bool operator==(const Checkpoint&) const = default;
};

/// "C2BCKPT1", u32 version, u64 metadata length, JSON metadata, then the
/// parameter blocks (and optimizer moments, if present) as little-endian f32.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError on bad magic, unsupported version, malformed metadata
/// or a payload whose length differs from the metadata.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace c2b
