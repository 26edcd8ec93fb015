#include <thread>

#include "c2b/error.hpp"
#include "c2b/evaluate.hpp"
#include "c2b/random.hpp"
#include "c2b/tokenize.hpp"

namespace c2b {

std::string_view to_string(QueryEnvironment env) {
  return env == QueryEnvironment::kStandard ? "standard" : "non-standard";
}

std::string MetricRow::name() const {
  return model + "-" + std::to_string(static_cast<int>(std::lround(retention * 100.0)));
}

std::vector<MetricRow> MetricsReport::rows_for(bool chat) const {
  std::vector<MetricRow> out;
  for (const auto& r : rows) {
    if (r.chat == chat) out.push_back(r);
  }
  return out;
}

namespace {

struct KScores {
  std::vector<double> auc, dice, iou;
  std::vector<bool> undefined;
};

struct SampleResult {
  QueryTrace trace;
  KScores plain;
  KScores chat;
};

KScores score_volume(std::span<const float> pred, std::span<const float> target, std::array<int, 3> dims,
                     const std::vector<double>& retention) {
  KScores s;
  const AucRanker ranker(pred);
  for (double k : retention) {
    const auto pm = topk_mask(pred, dims, k);
    const auto tm = topk_mask(target, dims, k);
    s.dice.push_back(dice(pm, tm));
    s.iou.push_back(iou(pm, tm));
    try {
      s.auc.push_back(ranker.auc(tm));
      s.undefined.push_back(false);
    } catch (const UndefinedMetric&) {
      s.auc.push_back(0.5);
      s.undefined.push_back(true);
    }
  }
  return s;
}

std::vector<float> predict(const ModelParams<float>& params, const EvalSample& s, const std::vector<std::string>& toks) {
  std::vector<float> latent = s.external_latent.empty() ? encode(params, std::span<const std::string>(toks))
                                                        : std::vector<float>(s.external_latent.begin(), s.external_latent.end());
  Activations<float> acts;
  forward(params, std::span<const float>(latent), acts);
  return std::move(acts.output);
}

SampleResult evaluate_sample(const Checkpoint& ckpt, const EvalSample& s, const EvalConfig& config) {
  SampleResult r;
  r.trace.id = s.record->id;
  auto tokens = tokenize(s.record->title);
  if (config.environment == QueryEnvironment::kNonStandard) {
    tokens = mask_tokens(tokens, config.mask_rate, mix_seed(config.mask_seed, fnv1a64(s.record->id)));
  }
  r.trace.query = join_tokens(tokens);
  const auto dims = ckpt.grid.dims;
  r.plain = score_volume(predict(ckpt.params, s, tokens), s.target, dims, config.retention);

  if (config.t2s != nullptr) {
    std::string semantic;
    try {
      semantic = refine_query(*config.index, *config.t2s, r.trace.query).best().candidate;
    } catch (const T2SError& e) {
      if (!e.partial().retrieved_ids.empty()) throw;
      semantic = r.trace.query;
      r.trace.t2s_fallback = true;
    }
    r.trace.semantic = semantic;
    r.chat = score_volume(predict(ckpt.params, s, tokenize(semantic)), s.target, dims, config.retention);
  }
  return r;
}

std::vector<MetricRow> aggregate(const std::vector<SampleResult>& results, const EvalConfig& config, bool chat) {
  std::vector<MetricRow> rows;
  for (std::size_t ki = 0; ki < config.retention.size(); ++ki) {
    MetricRow row;
    row.model = config.model_label;
    row.chat = chat;
    row.environment = config.environment;
    row.retention = config.retention[ki];
    double a = 0.0, d = 0.0, u = 0.0;
    for (const auto& res : results) {
      const auto& s = chat ? res.chat : res.plain;
      a += s.auc[ki];
      d += s.dice[ki];
      u += s.iou[ki];
      row.auc_undefined += s.undefined[ki];
    }
    const auto n = static_cast<double>(results.size());
    row.auc = a / n;
    row.dice = d / n;
    row.iou = u / n;
    row.samples = results.size();
    rows.push_back(row);
  }
  return rows;
}

std::optional<double> relative_percent(double left, double right) {
  if (left == 0.0) {
    if (right == 0.0) return 0.0;
    return std::nullopt;
  }
  return (right - left) / left * 100.0;
}

}  // namespace

std::vector<OverRow> over_deltas(const std::vector<MetricRow>& left, const std::vector<MetricRow>& right) {
  if (left.size() != right.size()) throw InvalidArgument("over_deltas: row counts differ");
  std::vector<OverRow> out;
  for (std::size_t i = 0; i < left.size(); ++i) {
    if (left[i].retention != right[i].retention) throw InvalidArgument("over_deltas: retention sweeps differ");
    out.push_back({left[i].name(), left[i].retention, relative_percent(left[i].auc, right[i].auc),
                   relative_percent(left[i].dice, right[i].dice), relative_percent(left[i].iou, right[i].iou)});
  }
  return out;
}

MetricsReport evaluate_model(const Checkpoint& ckpt, std::span<const EvalSample> samples, const EvalConfig& config) {
  if (samples.empty()) throw InvalidArgument("evaluation split is empty");
  if (config.retention.empty()) throw InvalidArgument("retention sweep is empty");
  for (double k : config.retention) retained_count(k, 1);
  if (!(config.mask_rate >= 0.0 && config.mask_rate <= 1.0)) throw InvalidArgument("mask rate must lie in [0, 1]");
  if (config.t2s != nullptr) {
    if (config.index == nullptr) throw InvalidArgument("query refinement needs a retrieval index");
    config.t2s->validate();
  }
  if (ckpt.grid.dims != ckpt.params.shape.output_grid()) throw InvalidArgument("checkpoint grid does not match its generator");
  for (const auto& s : samples) {
    if (s.record == nullptr) throw InvalidArgument("evaluation sample without a record");
    if (s.target.size() != ckpt.grid.voxel_count()) {
      throw InvalidArgument("study " + s.record->id + ": target grid does not match the checkpoint grid");
    }
    if (s.external_latent.empty() && ckpt.params.encoder_kind == EncoderKind::kExternalVectors) {
      throw InvalidArgument("study " + s.record->id + ": no external latent for an external-vector model");
    }
    if (!s.external_latent.empty() && config.t2s != nullptr) {
      throw InvalidArgument("query refinement needs the text encoder; external latents were given");
    }
  }

  std::vector<SampleResult> results(samples.size());
  const std::size_t workers = std::min<std::size_t>(samples.size(), static_cast<std::size_t>(std::max(config.threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) results[i] = evaluate_sample(ckpt, samples[i], config);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < samples.size(); i += workers) results[i] = evaluate_sample(ckpt, samples[i], config);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  MetricsReport report;
  report.rows = aggregate(results, config, false);
  if (config.t2s != nullptr) {
    auto chat = aggregate(results, config, true);
    report.over = over_deltas(report.rows, chat);
    report.rows.insert(report.rows.end(), chat.begin(), chat.end());
  }
  for (auto& r : results) {
    report.t2s_fallbacks += r.trace.t2s_fallback;
    report.queries.push_back(std::move(r.trace));
  }
  return report;
}

}  // namespace c2b
