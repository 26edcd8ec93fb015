#include "c2b/checkpoint.hpp"

#include <json.hpp>

#include "c2b/binary_io.hpp"
#include "c2b/error.hpp"

namespace c2b {

namespace {

constexpr char kMagic[] = "C2BCKPT1";
using nlohmann::json;

json shape_json(const GeneratorShape& s) {
  return {{"latent_dim", s.latent_dim},
          {"base_channels", s.base_channels},
          {"base_grid", s.base_grid},
          {"stage_channels", s.stage_channels}};
}

GeneratorShape shape_from(const json& j) {
  GeneratorShape s;
  s.latent_dim = j.at("latent_dim").get<int>();
  s.base_channels = j.at("base_channels").get<int>();
  s.base_grid = j.at("base_grid").get<std::array<int, 3>>();
  s.stage_channels = j.at("stage_channels").get<std::array<int, 3>>();
  return s;
}

json config_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"threads", c.threads},
          {"encoder", {{"kind", to_string(c.encoder.kind)}, {"hash_buckets", c.encoder.hash_buckets}}},
          {"optimizer",
           {{"name", "adamw"},
            {"beta1", c.optim.beta1},
            {"beta2", c.optim.beta2},
            {"eps", c.optim.eps},
            {"weight_decay", c.optim.weight_decay},
            {"lr_encoder", c.optim.lr_encoder},
            {"lr_generator", c.optim.lr_generator}}},
          {"loss", "mse"}};
}

TrainConfig config_from(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.threads = j.at("threads").get<int>();
  c.encoder.kind = parse_encoder_kind(j.at("encoder").at("kind").get<std::string>());
  c.encoder.hash_buckets = j.at("encoder").at("hash_buckets").get<int>();
  const auto& o = j.at("optimizer");
  c.optim.beta1 = o.at("beta1").get<double>();
  c.optim.beta2 = o.at("beta2").get<double>();
  c.optim.eps = o.at("eps").get<double>();
  c.optim.weight_decay = o.at("weight_decay").get<double>();
  c.optim.lr_encoder = o.at("lr_encoder").get<double>();
  c.optim.lr_generator = o.at("lr_generator").get<double>();
  return c;
}

void write_params(ByteWriter& w, const ModelParams<float>& p) {
  for (const auto& b : p.blocks()) w.f32_array(b.values);
}

void read_params(ByteReader& r, ModelParams<float>& p) {
  for (auto& b : p.blocks()) r.f32_array(b.values);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
  optim.validate();
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  json blocks = json::array();
  for (const auto& b : p.blocks()) {
    blocks.push_back({{"name", b.name}, {"shape", b.shape}, {"count", b.values.size()}});
  }
  json meta = {
      {"format_version", Checkpoint::kFormatVersion},
      {"grid",
       {{"dims", ckpt.grid.dims}, {"voxel_size_mm", ckpt.grid.voxel_size_mm}, {"origin_mm", ckpt.grid.origin_mm}}},
      {"generator", shape_json(p.shape)},
      {"encoder", {{"kind", to_string(p.encoder_kind)}, {"hash_buckets", p.hash_buckets}}},
      {"blocks", blocks},
      {"dtype", "float32-le"},
      {"parameter_count", p.parameter_count()},
      {"optimizer_state", ckpt.optimizer ? json{{"step", ckpt.optimizer->step}} : json(nullptr)},
      {"config", config_json(ckpt.config)},
      {"log", {{"epoch_loss", ckpt.log.epoch_loss}}},
  };
  const std::string meta_text = meta.dump();

  ByteWriter w;
  w.raw(std::string_view(kMagic, 8));
  w.u32(Checkpoint::kFormatVersion);
  w.u64(meta_text.size());
  w.raw(meta_text);
  write_params(w, p);
  if (ckpt.optimizer) {
    if (!ckpt.optimizer->m.same_layout(p) || !ckpt.optimizer->v.same_layout(p)) {
      throw InvalidArgument("optimizer moments do not match the parameters");
    }
    write_params(w, ckpt.optimizer->m);
    write_params(w, ckpt.optimizer->v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "checkpoint");
  if (r.remaining() < 8 || r.raw(8) != std::string_view(kMagic, 8)) {
    throw FormatError("magic", "not a checkpoint (expected C2BCKPT1)");
  }
  const std::uint32_t version = r.u32();
  if (version != Checkpoint::kFormatVersion) {
    throw FormatError("format_version", "unsupported version " + std::to_string(version) + " (expected " +
                                            std::to_string(Checkpoint::kFormatVersion) + ")");
  }
  const std::uint64_t meta_len = r.u64();
  if (meta_len > r.remaining()) throw FormatError("metadata", "length exceeds file size");
  const std::string meta_text = r.raw(meta_len);

  Checkpoint ckpt;
  std::size_t expected = 0;
  bool has_optimizer = false;
  std::uint64_t step = 0;
  try {
    const json meta = json::parse(meta_text);
    if (meta.at("format_version").get<std::uint32_t>() != version) {
      throw FormatError("format_version", "header and metadata disagree");
    }
    const auto& g = meta.at("grid");
    ckpt.grid.dims = g.at("dims").get<std::array<int, 3>>();
    ckpt.grid.voxel_size_mm = g.at("voxel_size_mm").get<std::array<double, 3>>();
    ckpt.grid.origin_mm = g.at("origin_mm").get<std::array<double, 3>>();
    ckpt.grid.validate();
    const auto shape = shape_from(meta.at("generator"));
    const auto kind = parse_encoder_kind(meta.at("encoder").at("kind").get<std::string>());
    const int buckets = meta.at("encoder").at("hash_buckets").get<int>();
    ckpt.params = ModelParams<float>::zeros(shape, kind, kind == EncoderKind::kBaselineHashing ? buckets : 1);
    const auto blocks = ckpt.params.blocks();
    const auto& listed = meta.at("blocks");
    if (listed.size() != blocks.size()) throw FormatError("blocks", "block count does not match the geometry");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (listed[i].at("name").get<std::string>() != blocks[i].name ||
          listed[i].at("count").get<std::size_t>() != blocks[i].values.size()) {
        throw FormatError("blocks", "block " + blocks[i].name + " does not match the geometry");
      }
    }
    expected = ckpt.params.parameter_count() * sizeof(float);
    const auto& opt = meta.at("optimizer_state");
    if (!opt.is_null()) {
      has_optimizer = true;
      step = opt.at("step").get<std::uint64_t>();
      expected *= 3;
    }
    ckpt.config = config_from(meta.at("config"));
    ckpt.log.epoch_loss = meta.at("log").at("epoch_loss").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw FormatError("metadata", e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError("metadata", e.what());
  }

  if (r.remaining() != expected) {
    throw FormatError("payload", "expected " + std::to_string(expected) + " bytes, found " +
                                     std::to_string(r.remaining()));
  }
  read_params(r, ckpt.params);
  if (has_optimizer) {
    OptimizerState<float> st = OptimizerState<float>::zeros_for(ckpt.params);
    st.step = step;
    read_params(r, st.m);
    read_params(r, st.v);
    ckpt.optimizer = std::move(st);
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_checkpoint(bytes);
}

}  // namespace c2b
