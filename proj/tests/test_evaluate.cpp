#include <gtest/gtest.h>

#include <algorithm>

#include "c2b/error.hpp"
#include "c2b/evaluate.hpp"
#include "c2b/random.hpp"
#include "c2b/tokenize.hpp"
#include "c2b/trainer.hpp"

using namespace c2b;

namespace {

GridSpec tiny_grid() {
  GridSpec g;
  g.dims = GeneratorShape::tiny().output_grid();
  return g;
}

struct Fixture {
  Checkpoint ckpt;
  Corpus corpus;
  std::vector<std::vector<float>> targets;
  std::vector<EvalSample> samples;
};

/// Each target is the model's own prediction for the sample title.
Fixture self_target_fixture(std::uint64_t seed = 4) {
  Fixture f;
  TrainConfig cfg;
  cfg.seed = seed;
  f.ckpt = initial_checkpoint(cfg, tiny_grid(), GeneratorShape::tiny());
  Rng rng(seed);
  for (auto& b : f.ckpt.params.blocks()) {
    for (auto& v : b.values) v = static_cast<float>(rng.uniform(-0.6, 0.6));
  }
  const char* titles[] = {"pain heat thermal", "visual contrast checkerboard", "motor finger tapping",
                          "pain noxious heat", "speech reading language"};
  for (int i = 0; i < 5; ++i) f.corpus.add({"e" + std::to_string(i), titles[i], {{0, 0, 0}}});
  for (const auto& r : f.corpus.records()) {
    const auto toks = tokenize(r.title);
    const auto lat = encode<float>(f.ckpt.params, toks);
    f.targets.push_back(generate(f.ckpt.params, tiny_grid(), lat).data);
    const auto [lo, hi] = std::minmax_element(f.targets.back().begin(), f.targets.back().end());
    EXPECT_LT(*lo, *hi);
  }
  for (std::size_t i = 0; i < f.targets.size(); ++i) f.samples.push_back({&f.corpus.records()[i], f.targets[i], {}});
  return f;
}

}  // namespace

TEST(Evaluate, OracleModelScoresPerfectly) {
  auto f = self_target_fixture();
  EvalConfig cfg;
  const auto rep = evaluate_model(f.ckpt, f.samples, cfg);
  ASSERT_EQ(rep.rows.size(), 10u);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.dice, 1.0) << r.name();
    EXPECT_EQ(r.iou, 1.0) << r.name();
    EXPECT_EQ(r.samples, 5u);
    if (r.retention == 1.0) {
      EXPECT_EQ(r.auc_undefined, 5u);
      EXPECT_EQ(r.auc, 0.5);
    } else {
      // Scores equal the targets; only ties straddling the cutoff keep AUC below 1.
      EXPECT_EQ(r.auc_undefined, 0u);
      double expect = 0;
      for (const auto& t : f.targets) expect += auc(t, topk_mask(t, tiny_grid().dims, r.retention));
      EXPECT_NEAR(r.auc, expect / 5, 1e-12);
      EXPECT_GT(r.auc, 0.5);
    }
  }
}

TEST(Evaluate, ConstantModelHasChanceAuc) {
  auto f = self_target_fixture();
  auto& p = f.ckpt.params;
  for (auto& b : p.blocks()) std::fill(b.values.begin(), b.values.end(), 0.0f);
  p.head_bias[0] = 0.25f;
  EvalConfig cfg;
  cfg.retention = {0.9, 0.5, 0.1};
  const auto rep = evaluate_model(f.ckpt, f.samples, cfg);
  for (const auto& r : rep.rows) EXPECT_EQ(r.auc, 0.5) << r.name();
}

TEST(Evaluate, ReportShapeWithChatCondition) {
  auto f = self_target_fixture();
  const auto index = TfIdfIndex::build_from_titles(f.corpus);
  MockLlmClient mock;
  T2SConfig t2s;
  t2s.client = &mock;
  EvalConfig cfg;
  cfg.retention = {1.0, 0.1};
  cfg.t2s = &t2s;
  cfg.index = &index;
  cfg.model_label = "aug";
  const auto rep = evaluate_model(f.ckpt, f.samples, cfg);
  ASSERT_EQ(rep.rows.size(), 4u);
  EXPECT_FALSE(rep.rows[0].chat);
  EXPECT_TRUE(rep.rows[2].chat);
  EXPECT_EQ(rep.rows[0].name(), "aug-100");
  EXPECT_EQ(rep.rows[1].name(), "aug-10");
  ASSERT_EQ(rep.over.size(), 2u);
  ASSERT_EQ(rep.queries.size(), 5u);
  for (const auto& q : rep.queries) EXPECT_FALSE(q.semantic.empty());
  const auto j = report_json(rep);
  EXPECT_EQ(j["rows"].size(), 4u);
  EXPECT_EQ(j["rows"][1]["name"], "aug-10");
  const auto table = format_report(rep);
  EXPECT_NE(table.find("aug-10"), std::string::npos);
  cfg.index = nullptr;
  EXPECT_THROW(evaluate_model(f.ckpt, f.samples, cfg), InvalidArgument);
}

TEST(Evaluate, MaskingAndFallback) {
  auto f = self_target_fixture();
  const auto index = TfIdfIndex::build(std::vector<std::pair<std::string, std::string>>{{"x", "unrelated words"}});
  MockLlmClient mock;
  T2SConfig t2s;
  t2s.client = &mock;
  EvalConfig cfg;
  cfg.retention = {0.5};
  cfg.environment = QueryEnvironment::kNonStandard;
  cfg.mask_rate = 1.0;
  cfg.t2s = &t2s;
  cfg.index = &index;
  const auto rep = evaluate_model(f.ckpt, f.samples, cfg);
  EXPECT_EQ(rep.t2s_fallbacks, 5u);
  for (const auto& q : rep.queries) {
    for (const auto& t : tokenize(q.query)) EXPECT_EQ(t, "mask");
    EXPECT_TRUE(q.t2s_fallback);
  }
  // Masking every token leaves the same all-"mask" query for every sample.
  const auto plain = rep.rows_for(false)[0];
  const auto chat = rep.rows_for(true)[0];
  EXPECT_EQ(plain.dice, chat.dice);
}

TEST(Evaluate, DeterministicAndThreadInvariant) {
  auto f = self_target_fixture();
  EvalConfig cfg;
  cfg.environment = QueryEnvironment::kNonStandard;
  cfg.mask_rate = 0.5;
  cfg.mask_seed = 3;
  // Perturb the model so masking changes the scores.
  f.ckpt.params.head_bias[0] += 0.01f;
  const auto a = evaluate_model(f.ckpt, f.samples, cfg);
  const auto b = evaluate_model(f.ckpt, f.samples, cfg);
  cfg.threads = 3;
  const auto c = evaluate_model(f.ckpt, f.samples, cfg);
  EXPECT_EQ(report_json(a).dump(), report_json(b).dump());
  EXPECT_EQ(report_json(a).dump(), report_json(c).dump());
  // Per-sample masks do not depend on sample order.
  std::vector<EvalSample> rev(f.samples.rbegin(), f.samples.rend());
  const auto d = evaluate_model(f.ckpt, rev, cfg);
  for (std::size_t i = 0; i < rev.size(); ++i) EXPECT_EQ(d.queries[i].query, a.queries[rev.size() - 1 - i].query);
}

TEST(Evaluate, Errors) {
  auto f = self_target_fixture();
  EvalConfig cfg;
  EXPECT_THROW(evaluate_model(f.ckpt, {}, cfg), InvalidArgument);
  cfg.retention = {0.0};
  EXPECT_THROW(evaluate_model(f.ckpt, f.samples, cfg), InvalidArgument);
  cfg.retention = {0.5};
  cfg.mask_rate = 2;
  EXPECT_THROW(evaluate_model(f.ckpt, f.samples, cfg), InvalidArgument);
  cfg.mask_rate = 0.3;
  std::vector<float> short_target(10);
  std::vector<EvalSample> bad = {{&f.corpus.records()[0], short_target, {}}};
  EXPECT_THROW(evaluate_model(f.ckpt, bad, cfg), InvalidArgument);
}

TEST(Over, RelativeDeltas) {
  MetricRow l, r;
  l.retention = r.retention = 0.5;
  l.model = "m";
  l.auc = 0.5;
  r.auc = 0.75;
  l.dice = 0.0;
  r.dice = 0.2;
  l.iou = r.iou = 0.4;
  const auto o = over_deltas({l}, {r});
  ASSERT_EQ(o.size(), 1u);
  EXPECT_EQ(o[0].name, "m-50");
  EXPECT_NEAR(*o[0].auc, 50.0, 1e-12);
  EXPECT_FALSE(o[0].dice.has_value());
  EXPECT_EQ(*o[0].iou, 0.0);
  r.retention = 0.1;
  EXPECT_THROW(over_deltas({l}, {r}), InvalidArgument);
  EXPECT_THROW(over_deltas({l}, {}), InvalidArgument);
}

TEST(Format, TablesUseModelRetentionRowNames) {
  MetricRow a;
  a.model = "non-aug";
  a.retention = 0.9;
  a.auc = 0.61;
  a.dice = 0.3;
  a.iou = 0.2;
  const auto t = format_table({a});
  EXPECT_NE(t.find("non-aug-90"), std::string::npos);
  auto b = a;
  b.chat = true;
  b.dice = 0.45;
  const auto paired = format_paired_table({a}, {b}, "non-chat", "chat");
  EXPECT_NE(paired.find("non-chat"), std::string::npos);
  EXPECT_NE(paired.find("50"), std::string::npos);  // +50% dice
}
