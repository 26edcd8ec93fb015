#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "c2b/augment.hpp"
#include "c2b/checkpoint.hpp"
#include "c2b/corpus.hpp"

namespace c2b {

/// One training pair. `augmented` may be null (title only). A non-empty
/// `external_latent` is used instead of the hashing encoder.
struct TrainingSample {
  const StudyRecord* record = nullptr;
  std::span<const float> target;
  const AugmentedStudy* augmented = nullptr;
  std::span<const float> external_latent;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<double> step_loss;  // batch MSE before each update
};

struct TrainHooks {
  std::function<void(int epoch, double mean_loss)> on_epoch;
};

/// Checkpoint holding the seeded initialization (what epochs = 0 returns).
Checkpoint initial_checkpoint(const TrainConfig& config, const GridSpec& grid,
                              const GeneratorShape& shape = GeneratorShape{});

/// Each epoch visits the samples in a fresh seeded random order, in batches
/// of config.batch_size (the last batch may be smaller). The text of every
/// drawn sample is chosen by variant_schedule(global step). Throws
/// InvalidArgument on an empty training set or a target/grid mismatch.
TrainResult train(const TrainConfig& config, const GridSpec& grid, std::span<const TrainingSample> samples,
                  const GeneratorShape& shape = GeneratorShape{}, const TrainHooks& hooks = {});

/// Continues from `start` (parameters, optimizer moments and step count);
/// epoch losses are appended to its log and config.epochs more epochs run.
TrainResult train_from(Checkpoint start, const TrainConfig& config, std::span<const TrainingSample> samples,
                       const TrainHooks& hooks = {});

/// Mean per-sample MSE of the model on the samples' titles.
double dataset_mse(const ModelParams<float>& params, std::span<const TrainingSample> samples);

/// External-vector encoder input: JSONL lines {"id": ..., "vector": [...]}.
/// Throws FormatError (naming the line) on malformed lines or a vector whose
/// length differs from `dim`.
std::unordered_map<std::string, std::vector<float>> load_external_latents(const std::filesystem::path& path,
                                                                          int dim = 768);
std::unordered_map<std::string, std::vector<float>> parse_external_latents(const std::string& text, int dim = 768);

}  // namespace c2b
