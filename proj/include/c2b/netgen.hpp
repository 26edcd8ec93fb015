#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "c2b/volgrid.hpp"

namespace c2b {

enum class EncoderKind { kBaselineHashing, kExternalVectors };
enum class ParamGroup { kEncoder, kGenerator };

std::string_view to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view name);

/// Layer geometry of the text-to-volume generator:
///   latent -> fc -> ReLU -> reshape (base_channels x base_grid)
///   -> 3 x [ConvTranspose3d(k=4, s=2, p=1) -> ReLU] -> 1x1x1 conv head.
/// Every transposed convolution doubles each spatial axis.
struct GeneratorShape {
  static constexpr int kKernel = 4;
  static constexpr int kStride = 2;
  static constexpr int kPadding = 1;
  static constexpr int kKernelVolume = kKernel * kKernel * kKernel;
  static constexpr int kStages = 3;

  int latent_dim = 768;
  int base_channels = 64;
  std::array<int, 3> base_grid{5, 6, 5};
  std::array<int, 3> stage_channels{32, 16, 8};

  /// Small geometry for gradient checks (output 16x16x8, ~1.6k parameters).
  static GeneratorShape tiny();

  void validate() const;
  /// Spatial grid entering stage `s` (0..2); stage_grid(3) is the output grid.
  std::array<int, 3> stage_grid(int s) const;
  std::array<int, 3> output_grid() const { return stage_grid(kStages); }
  int stage_in_channels(int s) const { return s == 0 ? base_channels : stage_channels[s - 1]; }
  std::size_t base_voxels() const {
    return static_cast<std::size_t>(base_grid[0]) * base_grid[1] * base_grid[2];
  }
  std::size_t fc_outputs() const { return base_voxels() * base_channels; }
  std::size_t output_voxels() const;

  bool operator==(const GeneratorShape&) const = default;
};

/// All trainable parameters: the encoder embedding table and the generator.
/// Used for values, gradients and optimizer moments alike.
template <typename T>
struct ModelParams {
  GeneratorShape shape;
  EncoderKind encoder_kind = EncoderKind::kBaselineHashing;
  int hash_buckets = 8192;

  std::vector<T> embedding;                    // hash_buckets x latent_dim (empty for external vectors)
  std::vector<T> fc_weight;                    // fc_outputs x latent_dim, row-major
  std::vector<T> fc_bias;                      // fc_outputs
  std::array<std::vector<T>, 3> deconv_weight;  // in x out x 4 x 4 x 4 (kz, ky, kx)
  std::array<std::vector<T>, 3> deconv_bias;    // out
  std::vector<T> head_weight;                  // stage_channels[2]
  std::vector<T> head_bias;                    // 1

  template <typename V>
  struct BlockT {
    std::string name;
    ParamGroup group;
    std::span<V> values;
    std::vector<int> shape;
  };
  using Block = BlockT<T>;
  using ConstBlock = BlockT<const T>;

  /// All-zero parameters of the given geometry.
  static ModelParams zeros(const GeneratorShape& shape, EncoderKind kind, int hash_buckets);

  /// Parameter blocks in a fixed order (encoder first).
  std::vector<Block> blocks();
  std::vector<ConstBlock> blocks() const;
  std::size_t parameter_count() const;
  /// Same geometry, every value zero.
  ModelParams zeros_like() const { return zeros(shape, encoder_kind, hash_buckets); }
  bool same_layout(const ModelParams& other) const;

  template <typename U>
  ModelParams<U> cast() const;

  bool operator==(const ModelParams&) const = default;
};

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kBaselineHashing;
  int hash_buckets = 8192;

  bool operator==(const EncoderConfig&) const = default;
};

/// Embedding ~ N(0, 1). Generator weights and biases ~ U(-b, b) with
/// b = 1/sqrt(fan_in), where fan_in is latent_dim for the fc layer,
/// out_channels * 64 for a transposed conv (the PyTorch convention) and
/// in_channels for the head.
ModelParams<float> init_model(const GeneratorShape& shape, const EncoderConfig& encoder, std::uint64_t seed);

/// Bucket of a token under the hashing encoder: FNV-1a 64 modulo buckets.
std::uint64_t token_bucket(std::string_view token, int hash_buckets);

/// Mean of the tokens' bucket embeddings; zero vector for no tokens.
template <typename T>
std::vector<T> encode(const ModelParams<T>& params, std::span<const std::string> tokens);

/// Post-activation buffers of one forward pass, channel-major (C x voxels,
/// x-fastest within a channel).
template <typename T>
struct Activations {
  std::vector<T> latent;
  std::vector<T> fc;                   // base_channels x base_voxels, after ReLU
  std::array<std::vector<T>, 3> stage;  // after each transposed conv + ReLU
  std::vector<T> output;               // linear head output
};

template <typename T>
void forward(const ModelParams<T>& params, std::span<const T> latent, Activations<T>& acts);

/// Volume for `latent` on `grid` (whose dims must equal the output grid).
/// Throws InvalidArgument if the latent length differs from latent_dim.
BrainVolume generate(const ModelParams<float>& params, const GridSpec& grid, std::span<const float> latent);

/// Mean squared error over voxels. Throws InvalidArgument on a grid mismatch.
double mse_loss(const BrainVolume& pred, const BrainVolume& target);

/// One training pair. `tokens` feeds the hashing encoder; `latent`, when
/// non-empty, replaces the encoder output (external-vector encoder).
struct Example {
  std::span<const std::string> tokens;
  std::span<const float> latent;
  std::span<const float> target;
};

/// Mean over the batch of the per-sample voxel MSE, accumulated in double.
template <typename T>
double batch_loss(const ModelParams<T>& params, std::span<const Example> batch);

/// Exact gradient of batch_loss with respect to every parameter, written into
/// `grads` (overwritten). ReLU'(0) is taken as 0. Per-sample work may run on
/// `threads` threads; per-sample results are always reduced in batch order,
/// so the result does not depend on the thread count. Returns the loss.
template <typename T>
double backward(const ModelParams<T>& params, std::span<const Example> batch, ModelParams<T>& grads, int threads = 1);

}  // namespace c2b
