#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "c2b/checkpoint.hpp"
#include "c2b/corpus.hpp"
#include "c2b/metrics.hpp"
#include "c2b/t2s.hpp"

namespace c2b {

/// Standard queries are the titles as written; non-standard queries have
/// tokens randomly replaced by "mask".
enum class QueryEnvironment { kStandard, kNonStandard };
std::string_view to_string(QueryEnvironment env);

struct EvalSample {
  const StudyRecord* record = nullptr;
  std::span<const float> target;
  /// Used instead of the text encoder when non-empty.
  std::span<const float> external_latent;
};

struct EvalConfig {
  std::vector<double> retention = canonical_retention();
  QueryEnvironment environment = QueryEnvironment::kStandard;
  double mask_rate = 0.3;
  std::uint64_t mask_seed = 0;
  /// Row-name prefix, e.g. "aug" or "non-aug".
  std::string model_label = "model";
  /// When set, every sample is evaluated both without and with query
  /// refinement (the "chat" condition). Requires `index`.
  const T2SConfig* t2s = nullptr;
  const TfIdfIndex* index = nullptr;
  int threads = 1;
};

struct MetricRow {
  std::string model;
  bool chat = false;
  QueryEnvironment environment = QueryEnvironment::kStandard;
  double retention = 1.0;
  double auc = 0.0;
  double dice = 0.0;
  double iou = 0.0;
  std::size_t samples = 0;
  /// Samples whose target top-k mask covers every voxel (or none); their AUC
  /// is undefined and enters the mean as 0.5.
  std::size_t auc_undefined = 0;

  /// "non-aug-90" style name.
  std::string name() const;
};

/// Relative change (right - left) / left in percent; empty when left is 0
/// and right is not.
struct OverRow {
  std::string name;
  double retention = 1.0;
  std::optional<double> auc, dice, iou;
};

struct QueryTrace {
  std::string id;
  std::string query;     // after masking, if any
  std::string semantic;  // refined query (chat condition only)
  bool t2s_fallback = false;
};

struct MetricsReport {
  std::vector<MetricRow> rows;  // non-chat rows first, then chat rows
  std::vector<OverRow> over;    // chat over non-chat, when both were run
  std::vector<QueryTrace> queries;
  /// Samples whose refinement failed (no similar sample); the unrefined query
  /// was used for them.
  std::size_t t2s_fallbacks = 0;

  std::vector<MetricRow> rows_for(bool chat) const;
};

/// Runs every sample through the model (optionally masked, optionally
/// refined) and averages AUC, Dice and IoU per retention fraction. Throws
/// InvalidArgument on an empty split, a grid/target mismatch or bad
/// retention values.
MetricsReport evaluate_model(const Checkpoint& ckpt, std::span<const EvalSample> samples, const EvalConfig& config);

std::vector<OverRow> over_deltas(const std::vector<MetricRow>& left, const std::vector<MetricRow>& right);

nlohmann::json report_json(const MetricsReport& report);
/// Aligned columns: one line per row name; with paired rows each metric shows
/// left, right and "over".
std::string format_table(const std::vector<MetricRow>& rows);
std::string format_paired_table(const std::vector<MetricRow>& left, const std::vector<MetricRow>& right,
                                const std::string& left_label, const std::string& right_label);
std::string format_report(const MetricsReport& report);

}  // namespace c2b
