#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "c2b/checkpoint.hpp"
#include "c2b/error.hpp"
#include "c2b/gradcheck.hpp"
#include "c2b/netgen.hpp"
#include "c2b/optimizer.hpp"
#include "c2b/random.hpp"
#include "c2b/tokenize.hpp"
#include "c2b/trainer.hpp"
#include "c2b/volgrid.hpp"
#include "test_support.hpp"

using namespace c2b;

namespace {

GridSpec tiny_grid() {
  GridSpec g;
  g.dims = GeneratorShape::tiny().output_grid();
  return g;
}

ModelParams<double> random_tiny(std::uint64_t seed) {
  Rng rng(seed);
  auto p = ModelParams<double>::zeros(GeneratorShape::tiny(), EncoderKind::kBaselineHashing, 16);
  for (auto& b : p.blocks()) {
    for (auto& v : b.values) v = rng.uniform(-0.6, 0.6);
  }
  return p;
}

// Direct-loop oracle of the generator, written from the layer definitions.
std::vector<double> oracle_forward(const ModelParams<double>& p, const std::vector<double>& latent) {
  const auto& s = p.shape;
  const std::size_t nfc = s.fc_outputs();
  std::vector<double> x(nfc);
  for (std::size_t j = 0; j < nfc; ++j) {
    double a = p.fc_bias[j];
    for (int k = 0; k < s.latent_dim; ++k) a += p.fc_weight[j * s.latent_dim + k] * latent[k];
    x[j] = std::max(a, 0.0);
  }
  for (int st = 0; st < 3; ++st) {
    const auto gi = s.stage_grid(st);
    const auto go = s.stage_grid(st + 1);
    const int ci = s.stage_in_channels(st), co = s.stage_channels[st];
    const std::size_t vin = static_cast<std::size_t>(gi[0]) * gi[1] * gi[2];
    const std::size_t vout = static_cast<std::size_t>(go[0]) * go[1] * go[2];
    std::vector<double> y(co * vout);
    for (int c = 0; c < co; ++c) {
      for (int oz = 0; oz < go[2]; ++oz)
        for (int oy = 0; oy < go[1]; ++oy)
          for (int ox = 0; ox < go[0]; ++ox) {
            double a = p.deconv_bias[st][c];
            for (int i = 0; i < ci; ++i)
              for (int kz = 0; kz < 4; ++kz)
                for (int ky = 0; ky < 4; ++ky)
                  for (int kx = 0; kx < 4; ++kx) {
                    // o = 2 i - 1 + k
                    const int iz2 = oz + 1 - kz, iy2 = oy + 1 - ky, ix2 = ox + 1 - kx;
                    if (iz2 % 2 || iy2 % 2 || ix2 % 2) continue;
                    const int iz = iz2 / 2, iy = iy2 / 2, ix = ix2 / 2;
                    if (iz < 0 || iy < 0 || ix < 0 || iz >= gi[2] || iy >= gi[1] || ix >= gi[0]) continue;
                    const double w = p.deconv_weight[st][((i * co + c) * 4 + kz) * 16 + ky * 4 + kx];
                    a += w * x[i * vin + (iz * gi[1] + iy) * gi[0] + ix];
                  }
            y[c * vout + (oz * go[1] + oy) * go[0] + ox] = std::max(a, 0.0);
          }
    }
    x = std::move(y);
  }
  const std::size_t vout = s.output_voxels();
  std::vector<double> out(vout, p.head_bias[0]);
  for (int c = 0; c < s.stage_channels[2]; ++c)
    for (std::size_t v = 0; v < vout; ++v) out[v] += p.head_weight[c] * x[c * vout + v];
  return out;
}

struct TinySet {
  Corpus corpus;
  std::vector<std::vector<float>> targets;
  std::vector<TrainingSample> samples;
};

TinySet tiny_set(int n) {
  TinySet s;
  const char* words[] = {"pain heat", "visual contrast", "motor finger tapping", "reward gambling"};
  for (int i = 0; i < n; ++i) {
    const PeakCoordinate peak{-60.0 + 10 * i, -90.0 + 8 * i, -60.0 + 6 * (i % 3)};
    s.corpus.add({"t" + std::to_string(i), words[i % 4] + std::string(" ") + std::to_string(i), {peak}});
    const std::vector<PeakCoordinate> peaks = {peak};
    s.targets.push_back(synthesize_target(tiny_grid(), peaks, 9.0).data);
  }
  for (int i = 0; i < n; ++i) s.samples.push_back({&s.corpus.records()[i], s.targets[i], nullptr, {}});
  return s;
}

TrainConfig tiny_config(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 3;
  c.optim.lr_generator = 1e-2;
  c.seed = 11;
  return c;
}

}  // namespace

TEST(Shape, DefaultGeometry) {
  const GeneratorShape s;
  EXPECT_EQ(s.output_grid(), (std::array<int, 3>{40, 48, 40}));
  EXPECT_EQ(s.fc_outputs(), 9600u);
  EXPECT_EQ(s.stage_grid(1), (std::array<int, 3>{10, 12, 10}));
  const auto p = ModelParams<float>::zeros(s, EncoderKind::kBaselineHashing, 8192);
  EXPECT_EQ(p.fc_weight.size() + p.fc_bias.size(), 7382400u);
  EXPECT_EQ(p.deconv_weight[0].size(), 64u * 32 * 64);
  EXPECT_EQ(p.head_weight.size(), 8u);
  const std::size_t gen = 7382400 + (64 * 32 * 64 + 32) + (32 * 16 * 64 + 16) + (16 * 8 * 64 + 8) + 9;
  EXPECT_EQ(p.parameter_count(), gen + 8192u * 768);
  const auto ext = ModelParams<float>::zeros(s, EncoderKind::kExternalVectors, 8192);
  EXPECT_TRUE(ext.embedding.empty());
  EXPECT_EQ(ext.parameter_count(), gen);
}

TEST(Shape, ValidateRejectsBadWidths) {
  GeneratorShape s;
  s.latent_dim = 0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  EXPECT_EQ(GeneratorShape::tiny().output_grid(), (std::array<int, 3>{16, 16, 8}));
}

TEST(Forward, MatchesDirectLoopOracle) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto p = random_tiny(seed);
    Rng rng(seed + 100);
    std::vector<double> lat(p.shape.latent_dim);
    for (auto& v : lat) v = rng.normal();
    Activations<double> acts;
    forward<double>(p, lat, acts);
    const auto expect = oracle_forward(p, lat);
    ASSERT_EQ(acts.output.size(), expect.size());
    double max_err = 0;
    for (std::size_t i = 0; i < expect.size(); ++i) max_err = std::max(max_err, std::abs(acts.output[i] - expect[i]));
    EXPECT_LT(max_err, 1e-12) << seed;
  }
}

TEST(Forward, ZeroModelGivesZeroVolumeAndOnlyHeadBiasGradient) {
  auto p = ModelParams<double>::zeros(GeneratorShape::tiny(), EncoderKind::kBaselineHashing, 16);
  const std::vector<std::string> toks = {"pain", "heat"};
  std::vector<double> target(p.shape.output_voxels(), 0.5);
  std::vector<float> target_f(target.begin(), target.end());
  const std::vector<Example> b2 = {{toks, {}, target_f}};
  auto grads = p.zeros_like();
  const double loss = backward<double>(p, b2, grads);
  EXPECT_NEAR(loss, 0.25, 1e-12);
  for (const auto& blk : grads.blocks()) {
    for (double g : blk.values) {
      if (blk.name.find("head.bias") != std::string::npos) {
        EXPECT_NEAR(g, -1.0, 1e-12);  // d/db mean (b - 0.5)^2 at b = 0
      } else {
        ASSERT_EQ(g, 0.0) << blk.name;
      }
    }
  }
}

TEST(Encoder, MeanOfBucketEmbeddings) {
  const auto p = init_model(GeneratorShape::tiny(), {EncoderKind::kBaselineHashing, 32}, 3);
  const std::vector<std::string> toks = {"pain", "heat", "pain"};
  const auto lat = encode<float>(p, toks);
  ASSERT_EQ(lat.size(), 6u);
  for (int k = 0; k < 6; ++k) {
    double e = 0;
    for (const auto& t : toks) e += p.embedding[token_bucket(t, 32) * 6 + k];
    EXPECT_NEAR(lat[k], e / 3, 1e-6);
  }
  const auto zero = encode<float>(p, std::span<const std::string>{});
  for (float v : zero) EXPECT_EQ(v, 0.0f);
  EXPECT_LT(token_bucket("anything", 32), 32u);
}

TEST(Init, DeterministicAndBounded) {
  const auto a = init_model(GeneratorShape::tiny(), {}, 5);
  EXPECT_TRUE(a == init_model(GeneratorShape::tiny(), {}, 5));
  EXPECT_FALSE(a == init_model(GeneratorShape::tiny(), {}, 6));
  const double b_fc = 1.0 / std::sqrt(6.0);
  for (float v : a.fc_weight) EXPECT_LE(std::abs(v), b_fc);
  const double b_d0 = 1.0 / std::sqrt(3.0 * 64);
  for (float v : a.deconv_weight[0]) EXPECT_LE(std::abs(v), b_d0);
}

TEST(Generate, RejectsWrongLatentLengthAndGrid) {
  const auto p = init_model(GeneratorShape::tiny(), {}, 1);
  const std::vector<float> lat(5, 0.1f);
  EXPECT_THROW(generate(p, tiny_grid(), lat), InvalidArgument);
  const std::vector<float> ok(6, 0.1f);
  EXPECT_THROW(generate(p, GridSpec{}, ok), InvalidArgument);
  const auto vol = generate(p, tiny_grid(), ok);
  EXPECT_EQ(vol.data.size(), tiny_grid().voxel_count());
  BrainVolume other{GridSpec{}, std::vector<float>(GridSpec{}.voxel_count())};
  EXPECT_THROW(mse_loss(vol, other), InvalidArgument);
  EXPECT_EQ(mse_loss(vol, vol), 0.0);
}

TEST(Backward, AgreesWithFiniteDifferences) {
  for (std::uint64_t seed : {1, 2, 3}) {
    GradCheckConfig c;
    c.seed = seed;
    const auto r = gradient_check(c);
    EXPECT_LT(r.max_rel_error, 1e-6) << r.worst_block << "[" << r.worst_index << "]";
    EXPECT_GE(r.checked, 200u);
    c.precision = Precision::kFloat32;
    EXPECT_LT(gradient_check(c).max_rel_error, 1e-3);
  }
  GradCheckConfig big;
  big.shape = GeneratorShape{};
  EXPECT_THROW(gradient_check(big), InvalidArgument);
}

TEST(Backward, ThreadCountDoesNotChangeGradients) {
  const auto p = random_tiny(4).cast<float>();
  const auto set = tiny_set(5);
  std::vector<std::vector<std::string>> toks;
  for (const auto& r : set.corpus.records()) toks.push_back(tokenize(r.title));
  std::vector<Example> batch;
  for (int i = 0; i < 5; ++i) batch.push_back({toks[i], {}, set.targets[i]});
  auto g1 = p.zeros_like(), g3 = p.zeros_like();
  const double l1 = backward<float>(p, batch, g1, 1);
  const double l3 = backward<float>(p, batch, g3, 3);
  EXPECT_EQ(l1, l3);
  EXPECT_TRUE(g1 == g3);
  EXPECT_NEAR(l1, batch_loss<float>(p, batch), 1e-9);
}

TEST(AdamW, SingleStepExamples) {
  AdamWConfig c;
  std::vector<double> p = {1.0}, g = {0.0}, m = {0.0}, v = {0.0};
  adamw_step<double>(p, g, m, v, 1, 0.1, c);
  EXPECT_NEAR(p[0], 0.999, 1e-12);
  p = {0.0}, g = {1.0}, m = {0.0}, v = {0.0};
  adamw_step<double>(p, g, m, v, 1, 0.1, c);
  EXPECT_NEAR(p[0], -0.1, 1e-8);
  EXPECT_NEAR(m[0], 0.1, 1e-12);
  EXPECT_NEAR(v[0], 0.001, 1e-12);
}

TEST(AdamW, ConvergesOnQuadratic) {
  AdamWConfig c;
  std::vector<double> p = {0.0}, g(1), m = {0.0}, v = {0.0};
  for (std::uint64_t t = 1; t <= 200; ++t) {
    g[0] = 2 * (p[0] - 3.0);
    adamw_step<double>(p, g, m, v, t, 0.1, c);
  }
  EXPECT_LT(std::abs(p[0] - 3.0), 0.05);
}

TEST(AdamW, GroupLearningRatesAndValidation) {
  auto p = ModelParams<double>::zeros(GeneratorShape::tiny(), EncoderKind::kBaselineHashing, 4);
  auto g = p.zeros_like();
  for (auto& b : g.blocks())
    for (auto& x : b.values) x = 1.0;
  auto st = OptimizerState<double>::zeros_for(p);
  AdamWConfig c;
  adamw_update(p, g, st, c);
  EXPECT_EQ(st.step, 1u);
  EXPECT_NEAR(p.embedding[0], -1e-5, 1e-12);
  EXPECT_NEAR(p.fc_weight[0], -3e-2, 1e-9);
  EXPECT_NEAR(p.head_bias[0], -3e-2, 1e-9);
  auto other = ModelParams<double>::zeros(GeneratorShape{}, EncoderKind::kBaselineHashing, 4);
  EXPECT_THROW(adamw_update(p, other, st, c), InvalidArgument);
  c.lr_generator = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.beta1 = 1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Checkpoint, RoundtripAndErrors) {
  testutil::TempDir dir;
  const auto set = tiny_set(4);
  auto ck = train(tiny_config(2), tiny_grid(), set.samples, GeneratorShape::tiny()).checkpoint;
  ASSERT_TRUE(ck.optimizer.has_value());
  const auto bytes = encode_checkpoint(ck);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "C2BCKPT1");
  EXPECT_TRUE(decode_checkpoint(bytes) == ck);
  save_checkpoint(ck, dir / "m.ckpt");
  EXPECT_TRUE(load_checkpoint(dir / "m.ckpt") == ck);

  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  auto ver = bytes;
  ver[8] = 9;
  EXPECT_THROW(decode_checkpoint(ver), FormatError);
  EXPECT_THROW(decode_checkpoint(std::span(bytes).first(bytes.size() - 4)), FormatError);
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(decode_checkpoint(longer), FormatError);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), IoError);
}

TEST(Train, ZeroEpochsReturnsInitialization) {
  const auto set = tiny_set(4);
  const auto r = train(tiny_config(0), tiny_grid(), set.samples, GeneratorShape::tiny());
  const auto init = initial_checkpoint(tiny_config(0), tiny_grid(), GeneratorShape::tiny());
  EXPECT_TRUE(r.checkpoint.params == init.params);
  EXPECT_TRUE(r.step_loss.empty());
  EXPECT_TRUE(r.checkpoint.log.epoch_loss.empty());
}

TEST(Train, DeterministicAndThreadInvariant) {
  const auto set = tiny_set(7);
  auto cfg = tiny_config(3);
  const auto a = train(cfg, tiny_grid(), set.samples, GeneratorShape::tiny());
  const auto b = train(cfg, tiny_grid(), set.samples, GeneratorShape::tiny());
  EXPECT_EQ(encode_checkpoint(a.checkpoint), encode_checkpoint(b.checkpoint));
  EXPECT_EQ(a.step_loss, b.step_loss);
  EXPECT_EQ(a.step_loss.size(), 9u);  // 3 epochs x ceil(7 / 3)
  cfg.threads = 3;
  const auto c = train(cfg, tiny_grid(), set.samples, GeneratorShape::tiny());
  EXPECT_TRUE(c.checkpoint.params == a.checkpoint.params);
  cfg.seed = 12;
  cfg.threads = 1;
  EXPECT_FALSE(train(cfg, tiny_grid(), set.samples, GeneratorShape::tiny()).checkpoint.params == a.checkpoint.params);
}

TEST(Train, ResumeMatchesUninterruptedRun) {
  const auto set = tiny_set(6);
  const auto full = train(tiny_config(4), tiny_grid(), set.samples, GeneratorShape::tiny());
  const auto half = train(tiny_config(2), tiny_grid(), set.samples, GeneratorShape::tiny());
  const auto rest = train_from(half.checkpoint, tiny_config(2), set.samples);
  EXPECT_EQ(rest.checkpoint.log.epoch_loss.size(), 4u);
  EXPECT_EQ(rest.checkpoint.optimizer->step, full.checkpoint.optimizer->step);
}

TEST(Train, SmoothedLossDecreases) {
  const auto set = tiny_set(8);
  auto cfg = tiny_config(60);
  cfg.optim.lr_generator = 3e-3;
  cfg.batch_size = 4;
  const auto r = train(cfg, tiny_grid(), set.samples, GeneratorShape::tiny());
  const auto& l = r.step_loss;
  ASSERT_EQ(l.size(), 120u);
  auto window = [&](std::size_t i) { return std::accumulate(l.begin() + i, l.begin() + i + 20, 0.0) / 20; };
  for (std::size_t i = 20; i + 20 <= l.size(); i += 20) EXPECT_LE(window(i), window(i - 20) * 1.001) << i;
  EXPECT_LT(dataset_mse(r.checkpoint.params, set.samples), l.front());
}

TEST(Train, RejectsEmptySetAndGridMismatch) {
  EXPECT_THROW(train(tiny_config(1), tiny_grid(), {}, GeneratorShape::tiny()), InvalidArgument);
  const auto set = tiny_set(2);
  EXPECT_THROW(train(tiny_config(1), GridSpec{}, set.samples, GeneratorShape::tiny()), InvalidArgument);
  auto cfg = tiny_config(1);
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(ExternalLatents, ParseAndErrors) {
  const auto m = parse_external_latents("{\"id\": \"a\", \"vector\": [1, 2, 3]}\n\n{\"id\": \"b\", \"vector\": [0, 0, 1]}\n", 3);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.at("a"), (std::vector<float>{1, 2, 3}));
  try {
    parse_external_latents("{\"id\": \"a\", \"vector\": [1, 2, 3]}\n{\"id\": \"b\", \"vector\": [1]}\n", 3);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  EXPECT_THROW(parse_external_latents("nope\n", 3), FormatError);
}

TEST(ExternalLatents, TrainWithExternalVectors) {
  auto set = tiny_set(4);
  std::vector<std::vector<float>> lats(4, std::vector<float>(6));
  for (int i = 0; i < 4; ++i) lats[i][i] = 1.0f;
  for (int i = 0; i < 4; ++i) set.samples[i].external_latent = lats[i];
  auto cfg = tiny_config(2);
  cfg.encoder.kind = EncoderKind::kExternalVectors;
  const auto r = train(cfg, tiny_grid(), set.samples, GeneratorShape::tiny());
  EXPECT_TRUE(r.checkpoint.params.embedding.empty());
  EXPECT_EQ(r.step_loss.size(), 4u);
}
