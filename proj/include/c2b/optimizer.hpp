#pragma once

#include <cstdint>
#include <span>

#include "c2b/netgen.hpp"

namespace c2b {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
  double lr_encoder = 1e-5;
  double lr_generator = 3e-2;

  /// Throws InvalidArgument on non-positive learning rates, betas outside
  /// [0, 1), eps <= 0 or negative weight decay.
  void validate() const;
  bool operator==(const AdamWConfig&) const = default;
};

/// First and second moments shaped like the parameters, plus the step count.
template <typename T>
struct OptimizerState {
  ModelParams<T> m;
  ModelParams<T> v;
  std::uint64_t step = 0;

  static OptimizerState zeros_for(const ModelParams<T>& params) {
    return {params.zeros_like(), params.zeros_like(), 0};
  }
  bool operator==(const OptimizerState&) const = default;
};

/// One AdamW step on a flat parameter block. `step` is the 1-based step
/// number used for bias correction.
template <typename T>
void adamw_step(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v, std::uint64_t step,
                double lr, const AdamWConfig& config);

/// p <- p - lr*wd*p - lr*mhat/(sqrt(vhat)+eps), with lr_encoder for the
/// embedding table and lr_generator for everything else. Increments
/// state.step. Throws InvalidArgument when the layouts disagree.
template <typename T>
void adamw_update(ModelParams<T>& params, const ModelParams<T>& grads, OptimizerState<T>& state,
                  const AdamWConfig& config);

}  // namespace c2b
