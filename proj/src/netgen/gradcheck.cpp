#include "c2b/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "c2b/error.hpp"
#include "c2b/random.hpp"

namespace c2b {

namespace {

struct FlatRef {
  std::size_t block;
  std::size_t index;
};

std::vector<FlatRef> flat_index(const ModelParams<double>& p) {
  std::vector<FlatRef> refs;
  const auto blocks = p.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i = 0; i < blocks[b].values.size(); ++i) refs.push_back({b, i});
  }
  return refs;
}

struct Probe {
  std::vector<std::vector<double>> outputs;  // per example
  std::vector<bool> pattern;                 // rectifier on/off states
};

Probe probe(const ModelParams<double>& p, std::span<const Example> batch) {
  Probe out;
  Activations<double> acts;
  for (const auto& ex : batch) {
    const auto latent = encode(p, ex.tokens);
    forward(p, std::span<const double>(latent), acts);
    for (double x : acts.fc) out.pattern.push_back(x > 0.0);
    for (const auto& st : acts.stage) {
      for (double x : st) out.pattern.push_back(x > 0.0);
    }
    out.outputs.push_back(acts.output);
  }
  return out;
}

// (L(w+h) - L(w-h)) / 2h with the loss difference summed per voxel as
// (o+ - o-)(o+ + o- - 2t), so the two large loss values never cancel.
double central_difference(const Probe& plus, const Probe& minus, std::span<const Example> batch, double h) {
  double total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& op = plus.outputs[b];
    const auto& om = minus.outputs[b];
    double sum = 0.0;
    for (std::size_t v = 0; v < op.size(); ++v) {
      sum += (op[v] - om[v]) * (op[v] + om[v] - 2.0 * static_cast<double>(batch[b].target[v]));
    }
    total += sum / static_cast<double>(op.size());
  }
  return total / static_cast<double>(batch.size()) / (2.0 * h);
}

}  // namespace

GradCheckReport gradient_check(const GradCheckConfig& config) {
  if (config.batch_size < 1 || config.parameters < 1 || !(config.step > 0.0) || !(config.floor > 0.0)) {
    throw InvalidArgument("gradient_check: batch_size, parameters, step and floor must be positive");
  }
  const auto model = init_model(config.shape, {EncoderKind::kBaselineHashing, config.hash_buckets}, config.seed);
  if (model.parameter_count() > 10000) throw InvalidArgument("gradient_check needs a model with <= 10^4 parameters");
  ModelParams<double> p64 = model.cast<double>();

  // Synthetic batch: short random token lists and random non-negative targets.
  Rng rng(mix_seed(config.seed, 7));
  const std::size_t voxels = config.shape.output_voxels();
  std::vector<std::vector<std::string>> tokens(config.batch_size);
  std::vector<std::vector<float>> targets(config.batch_size);
  std::vector<Example> batch;
  for (int b = 0; b < config.batch_size; ++b) {
    const auto n = 1 + rng.below(4);
    for (std::uint64_t t = 0; t < n; ++t) tokens[b].push_back("tok" + std::to_string(rng.below(40)));
    targets[b].resize(voxels);
    for (auto& v : targets[b]) v = static_cast<float>(rng.uniform01());
  }
  for (int b = 0; b < config.batch_size; ++b) {
    batch.push_back({std::span<const std::string>(tokens[b]), {}, std::span<const float>(targets[b])});
  }
  const std::span<const Example> span(batch);

  std::vector<double> analytic;
  if (config.precision == Precision::kFloat64) {
    ModelParams<double> g;
    backward(p64, span, g);
    for (const auto& blk : g.blocks()) analytic.insert(analytic.end(), blk.values.begin(), blk.values.end());
  } else {
    ModelParams<float> g;
    backward(model, span, g);
    for (const auto& blk : g.blocks()) analytic.insert(analytic.end(), blk.values.begin(), blk.values.end());
  }

  GradCheckReport report;
  report.parameter_count = p64.parameter_count();
  auto refs = flat_index(p64);
  // Draw order: a seeded shuffle of all parameter positions.
  std::vector<std::size_t> order(refs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const auto base_pattern = probe(p64, span).pattern;
  const double h = config.step;
  for (std::size_t flat : order) {
    if (report.checked >= static_cast<std::size_t>(config.parameters)) break;
    auto blocks = p64.blocks();
    double& w = blocks[refs[flat].block].values[refs[flat].index];
    const double saved = w;
    w = saved + h;
    const auto plus = probe(p64, span);
    w = saved - h;
    const auto minus = probe(p64, span);
    w = saved;
    if (plus.pattern != base_pattern || minus.pattern != base_pattern) {
      ++report.skipped_kinks;
      continue;
    }
    const double numeric = central_difference(plus, minus, span, h);
    const double a = analytic[flat];
    const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), config.floor});
    ++report.checked;
    if (err >= report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_block = blocks[refs[flat].block].name;
      report.worst_index = refs[flat].index;
      report.worst_analytic = a;
      report.worst_numeric = numeric;
    }
  }
  return report;
}

}  // namespace c2b
