#include <cmath>

#include "c2b/error.hpp"
#include "c2b/netgen.hpp"
#include "c2b/random.hpp"

namespace c2b {

std::string_view to_string(EncoderKind kind) {
  return kind == EncoderKind::kBaselineHashing ? "baseline-hashing" : "external-vectors";
}

EncoderKind parse_encoder_kind(std::string_view name) {
  if (name == "baseline-hashing") return EncoderKind::kBaselineHashing;
  if (name == "external-vectors") return EncoderKind::kExternalVectors;
  throw InvalidArgument("unknown encoder kind: " + std::string(name));
}

GeneratorShape GeneratorShape::tiny() {
  GeneratorShape s;
  s.latent_dim = 6;
  s.base_channels = 4;
  s.base_grid = {2, 2, 1};
  s.stage_channels = {3, 2, 2};
  return s;
}

void GeneratorShape::validate() const {
  if (latent_dim < 1 || base_channels < 1) throw InvalidArgument("generator widths must be >= 1");
  for (int a = 0; a < 3; ++a) {
    if (base_grid[a] < 1) throw InvalidArgument("generator base grid must be >= 1");
    if (stage_channels[a] < 1) throw InvalidArgument("generator stage channels must be >= 1");
  }
}

std::array<int, 3> GeneratorShape::stage_grid(int s) const {
  std::array<int, 3> g = base_grid;
  for (int i = 0; i < s; ++i) {
    // (in - 1) * stride - 2 * padding + kernel = 2 * in
    for (auto& d : g) d = (d - 1) * kStride - 2 * kPadding + kKernel;
  }
  return g;
}

std::size_t GeneratorShape::output_voxels() const {
  const auto g = output_grid();
  return static_cast<std::size_t>(g[0]) * g[1] * g[2];
}

template <typename T>
ModelParams<T> ModelParams<T>::zeros(const GeneratorShape& shape, EncoderKind kind, int hash_buckets) {
  shape.validate();
  if (kind == EncoderKind::kBaselineHashing && hash_buckets < 1) throw InvalidArgument("hash_buckets must be >= 1");
  ModelParams p;
  p.shape = shape;
  p.encoder_kind = kind;
  p.hash_buckets = kind == EncoderKind::kBaselineHashing ? hash_buckets : 0;
  p.embedding.assign(static_cast<std::size_t>(p.hash_buckets) * shape.latent_dim, T(0));
  p.fc_weight.assign(shape.fc_outputs() * shape.latent_dim, T(0));
  p.fc_bias.assign(shape.fc_outputs(), T(0));
  for (int s = 0; s < GeneratorShape::kStages; ++s) {
    const auto in = static_cast<std::size_t>(shape.stage_in_channels(s));
    const auto out = static_cast<std::size_t>(shape.stage_channels[s]);
    p.deconv_weight[s].assign(in * out * GeneratorShape::kKernelVolume, T(0));
    p.deconv_bias[s].assign(out, T(0));
  }
  p.head_weight.assign(shape.stage_channels[2], T(0));
  p.head_bias.assign(1, T(0));
  return p;
}

namespace {

template <typename Out, typename P>
Out make_blocks(P& p) {
  Out out;
  const auto& s = p.shape;
  const int k = GeneratorShape::kKernel;
  if (p.encoder_kind == EncoderKind::kBaselineHashing) {
    out.push_back({"encoder.embedding", ParamGroup::kEncoder, std::span(p.embedding), {p.hash_buckets, s.latent_dim}});
  }
  const int fc_out = static_cast<int>(s.fc_outputs());
  out.push_back({"generator.fc.weight", ParamGroup::kGenerator, std::span(p.fc_weight), {fc_out, s.latent_dim}});
  out.push_back({"generator.fc.bias", ParamGroup::kGenerator, std::span(p.fc_bias), {fc_out}});
  for (int i = 0; i < GeneratorShape::kStages; ++i) {
    const std::string prefix = "generator.deconv" + std::to_string(i + 1);
    out.push_back({prefix + ".weight", ParamGroup::kGenerator, std::span(p.deconv_weight[i]),
                   {s.stage_in_channels(i), s.stage_channels[i], k, k, k}});
    out.push_back({prefix + ".bias", ParamGroup::kGenerator, std::span(p.deconv_bias[i]), {s.stage_channels[i]}});
  }
  out.push_back({"generator.head.weight", ParamGroup::kGenerator, std::span(p.head_weight), {1, s.stage_channels[2], 1, 1, 1}});
  out.push_back({"generator.head.bias", ParamGroup::kGenerator, std::span(p.head_bias), {1}});
  return out;
}

}  // namespace

template <typename T>
std::vector<typename ModelParams<T>::Block> ModelParams<T>::blocks() {
  return make_blocks<std::vector<Block>>(*this);
}

template <typename T>
std::vector<typename ModelParams<T>::ConstBlock> ModelParams<T>::blocks() const {
  return make_blocks<std::vector<ConstBlock>>(*this);
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks()) n += b.values.size();
  return n;
}

template <typename T>
bool ModelParams<T>::same_layout(const ModelParams& other) const {
  if (!(shape == other.shape) || encoder_kind != other.encoder_kind || hash_buckets != other.hash_buckets) return false;
  const auto a = blocks();
  const auto b = other.blocks();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].values.size() != b[i].values.size()) return false;
  }
  return true;
}

template <typename T>
template <typename U>
ModelParams<U> ModelParams<T>::cast() const {
  auto out = ModelParams<U>::zeros(shape, encoder_kind, hash_buckets == 0 ? 1 : hash_buckets);
  auto dst = out.blocks();
  const auto src = blocks();
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t j = 0; j < src[i].values.size(); ++j) dst[i].values[j] = static_cast<U>(src[i].values[j]);
  }
  return out;
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<double> ModelParams<float>::cast<double>() const;
template ModelParams<float> ModelParams<double>::cast<float>() const;
template ModelParams<float> ModelParams<float>::cast<float>() const;
template ModelParams<double> ModelParams<double>::cast<double>() const;

ModelParams<float> init_model(const GeneratorShape& shape, const EncoderConfig& encoder, std::uint64_t seed) {
  auto p = ModelParams<float>::zeros(shape, encoder.kind, encoder.hash_buckets);
  Rng rng(mix_seed(seed, 0));
  for (auto& x : p.embedding) x = static_cast<float>(rng.normal());
  auto uniform_fill = [&rng](std::vector<float>& v, double fan_in) {
    const double b = 1.0 / std::sqrt(fan_in);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-b, b));
  };
  uniform_fill(p.fc_weight, shape.latent_dim);
  uniform_fill(p.fc_bias, shape.latent_dim);
  for (int s = 0; s < GeneratorShape::kStages; ++s) {
    const double fan_in = static_cast<double>(shape.stage_channels[s]) * GeneratorShape::kKernelVolume;
    uniform_fill(p.deconv_weight[s], fan_in);
    uniform_fill(p.deconv_bias[s], fan_in);
  }
  uniform_fill(p.head_weight, shape.stage_channels[2]);
  uniform_fill(p.head_bias, shape.stage_channels[2]);
  return p;
}

}  // namespace c2b
