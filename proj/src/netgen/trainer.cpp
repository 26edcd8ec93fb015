#include "c2b/trainer.hpp"

#include <numeric>

#include "c2b/error.hpp"
#include "c2b/random.hpp"
#include "c2b/tokenize.hpp"

namespace c2b {

namespace {

void check_samples(const GridSpec& grid, const GeneratorShape& shape, std::span<const TrainingSample> samples) {
  if (grid.dims != shape.output_grid()) throw InvalidArgument("grid dims do not match the generator output");
  for (const auto& s : samples) {
    if (s.record == nullptr) throw InvalidArgument("training sample without a record");
    if (s.target.size() != grid.voxel_count()) {
      throw InvalidArgument("study " + s.record->id + ": target has " + std::to_string(s.target.size()) +
                            " voxels, grid has " + std::to_string(grid.voxel_count()));
    }
  }
}

}  // namespace

Checkpoint initial_checkpoint(const TrainConfig& config, const GridSpec& grid, const GeneratorShape& shape) {
  config.validate();
  grid.validate();
  if (grid.dims != shape.output_grid()) throw InvalidArgument("grid dims do not match the generator output");
  Checkpoint ckpt;
  ckpt.grid = grid;
  ckpt.params = init_model(shape, config.encoder, config.seed);
  ckpt.optimizer = OptimizerState<float>::zeros_for(ckpt.params);
  ckpt.config = config;
  return ckpt;
}

TrainResult train(const TrainConfig& config, const GridSpec& grid, std::span<const TrainingSample> samples,
                  const GeneratorShape& shape, const TrainHooks& hooks) {
  check_samples(grid, shape, samples);
  if (samples.empty()) throw InvalidArgument("empty training set");
  return train_from(initial_checkpoint(config, grid, shape), config, samples, hooks);
}

TrainResult train_from(Checkpoint start, const TrainConfig& config, std::span<const TrainingSample> samples,
                       const TrainHooks& hooks) {
  if (samples.empty()) throw InvalidArgument("empty training set");
  config.validate();
  check_samples(start.grid, start.params.shape, samples);
  TrainResult result;
  result.checkpoint = std::move(start);
  if (!result.checkpoint.optimizer) result.checkpoint.optimizer = OptimizerState<float>::zeros_for(result.checkpoint.params);
  result.checkpoint.config = config;

  auto& params = result.checkpoint.params;
  auto& state = *result.checkpoint.optimizer;
  ModelParams<float> grads = params.zeros_like();
  Rng order_rng(mix_seed(config.seed, 1 + state.step));
  std::vector<std::size_t> order(samples.size());
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  std::vector<std::vector<std::string>> tokens(batch_size);
  std::vector<Example> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);

    double epoch_sum = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      const TextVariant variant = variant_schedule(state.step);
      batch.clear();
      for (std::size_t j = start; j < end; ++j) {
        const auto& s = samples[order[j]];
        auto& toks = tokens[j - start];
        if (s.external_latent.empty()) {
          toks = tokenize(select_text(*s.record, s.augmented, variant));
        } else {
          toks.clear();
        }
        batch.push_back({std::span<const std::string>(toks), s.external_latent, s.target});
      }
      const double loss = backward(params, std::span<const Example>(batch), grads, config.threads);
      adamw_update(params, grads, state, config.optim);
      result.step_loss.push_back(loss);
      epoch_sum += loss;
      ++epoch_steps;
    }
    const double mean = epoch_sum / static_cast<double>(epoch_steps);
    result.checkpoint.log.epoch_loss.push_back(mean);
    if (hooks.on_epoch) hooks.on_epoch(epoch, mean);
  }
  return result;
}

double dataset_mse(const ModelParams<float>& params, std::span<const TrainingSample> samples) {
  if (samples.empty()) throw InvalidArgument("empty sample set");
  double total = 0.0;
  for (const auto& s : samples) {
    const auto toks = s.external_latent.empty() ? tokenize(s.record->title) : std::vector<std::string>{};
    const Example ex{std::span<const std::string>(toks), s.external_latent, s.target};
    total += batch_loss(params, std::span<const Example>(&ex, 1));
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace c2b
