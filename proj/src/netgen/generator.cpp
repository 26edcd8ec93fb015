#include <Eigen/Core>
#include <algorithm>
#include <thread>

#include "c2b/error.hpp"
#include "c2b/netgen.hpp"

namespace c2b {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstRowMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct Geometry {
  std::array<int, 3> in;
  std::array<int, 3> out;
  std::size_t in_voxels() const { return static_cast<std::size_t>(in[0]) * in[1] * in[2]; }
  std::size_t out_voxels() const { return static_cast<std::size_t>(out[0]) * out[1] * out[2]; }
};

Geometry stage_geometry(const GeneratorShape& shape, int s) {
  return {shape.stage_grid(s), shape.stage_grid(s + 1)};
}

// Visits every (input voxel, kernel tap) pair that lands inside the output
// grid: o = i * stride - padding + k along each axis.
template <typename F>
void for_each_tap(const Geometry& g, F&& f) {
  constexpr int K = GeneratorShape::kKernel;
  constexpr int S = GeneratorShape::kStride;
  constexpr int P = GeneratorShape::kPadding;
  for (int kz = 0; kz < K; ++kz) {
    for (int ky = 0; ky < K; ++ky) {
      for (int kx = 0; kx < K; ++kx) {
        const int tap = (kz * K + ky) * K + kx;
        for (int iz = 0; iz < g.in[2]; ++iz) {
          const int oz = iz * S - P + kz;
          if (oz < 0 || oz >= g.out[2]) continue;
          for (int iy = 0; iy < g.in[1]; ++iy) {
            const int oy = iy * S - P + ky;
            if (oy < 0 || oy >= g.out[1]) continue;
            const std::size_t in_row = static_cast<std::size_t>(g.in[0]) * (iy + static_cast<std::size_t>(g.in[1]) * iz);
            const std::size_t out_row = static_cast<std::size_t>(g.out[0]) * (oy + static_cast<std::size_t>(g.out[1]) * oz);
            // ix range with 0 <= ix*S - P + kx < out_x
            for (int ix = 0; ix < g.in[0]; ++ix) {
              const int ox = ix * S - P + kx;
              if (ox < 0 || ox >= g.out[0]) continue;
              f(tap, in_row + ix, out_row + ox);
            }
          }
        }
      }
    }
  }
}

// out (Co x Pout) = relu(col2im(W^T in) + b); `cols` is scratch.
template <typename T>
void deconv_forward(const Geometry& g, int ci, int co, const T* in, const T* w, const T* b, T* out,
                    std::vector<T>& cols) {
  constexpr int KV = GeneratorShape::kKernelVolume;
  const auto n_in = static_cast<Eigen::Index>(g.in_voxels());
  const std::size_t n_out = g.out_voxels();
  cols.resize(static_cast<std::size_t>(co) * KV * n_in);
  RowMap<T>(cols.data(), co * KV, n_in).noalias() =
      ConstRowMap<T>(w, ci, co * KV).transpose() * ConstRowMap<T>(in, ci, n_in);

  for (int c = 0; c < co; ++c) std::fill(out + c * n_out, out + (c + 1) * n_out, b[c]);
  for (int c = 0; c < co; ++c) {
    T* dst = out + c * n_out;
    const T* src = cols.data() + static_cast<std::size_t>(c) * KV * n_in;
    for_each_tap(g, [&](int tap, std::size_t i, std::size_t o) { dst[o] += src[tap * n_in + i]; });
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(co) * n_out; ++i) out[i] = std::max(out[i], T(0));
}

// Given dout (Co x Pout, already masked by this layer's ReLU), writes
// dW (Ci x Co*64), db (Co) and din (Ci x Pin, not yet masked).
template <typename T>
void deconv_backward(const Geometry& g, int ci, int co, const T* in, const T* w, const T* dout, T* dw, T* db,
                     T* din, std::vector<T>& dcols) {
  constexpr int KV = GeneratorShape::kKernelVolume;
  const auto n_in = static_cast<Eigen::Index>(g.in_voxels());
  const std::size_t n_out = g.out_voxels();
  dcols.assign(static_cast<std::size_t>(co) * KV * n_in, T(0));
  for (int c = 0; c < co; ++c) {
    const T* src = dout + c * n_out;
    T* dst = dcols.data() + static_cast<std::size_t>(c) * KV * n_in;
    for_each_tap(g, [&](int tap, std::size_t i, std::size_t o) { dst[tap * n_in + i] = src[o]; });
    T sum = T(0);
    for (std::size_t o = 0; o < n_out; ++o) sum += src[o];
    db[c] = sum;
  }
  ConstRowMap<T> dc(dcols.data(), co * KV, n_in);
  RowMap<T>(dw, ci, co * KV).noalias() = ConstRowMap<T>(in, ci, n_in) * dc.transpose();
  RowMap<T>(din, ci, n_in).noalias() = ConstRowMap<T>(w, ci, co * KV) * dc;
}

template <typename T>
void check_latent(const ModelParams<T>& params, std::size_t n) {
  if (n != static_cast<std::size_t>(params.shape.latent_dim)) {
    throw InvalidArgument("latent length " + std::to_string(n) + " != " + std::to_string(params.shape.latent_dim));
  }
}

template <typename T>
std::vector<T> example_latent(const ModelParams<T>& params, const Example& ex) {
  if (!ex.latent.empty()) {
    check_latent(params, ex.latent.size());
    return std::vector<T>(ex.latent.begin(), ex.latent.end());
  }
  if (params.encoder_kind != EncoderKind::kBaselineHashing) {
    throw InvalidArgument("external-vector encoder needs a precomputed latent");
  }
  return encode(params, ex.tokens);
}

template <typename T>
void check_target(const ModelParams<T>& params, const Example& ex) {
  if (ex.target.size() != params.shape.output_voxels()) {
    throw InvalidArgument("target has " + std::to_string(ex.target.size()) + " voxels, model outputs " +
                          std::to_string(params.shape.output_voxels()));
  }
}

/// Per-sample pieces of the gradient, reduced in batch order afterwards.
template <typename T>
struct SampleGrad {
  std::vector<T> latent;
  std::vector<T> d_fc;      // dL/d(fc pre-activation)
  std::vector<T> d_latent;  // dL/d(latent)
  std::array<std::vector<T>, 3> dw, db;
  std::vector<T> d_head_w;
  T d_head_b = T(0);
  double loss = 0.0;
};

template <typename T>
void sample_backward(const ModelParams<T>& p, const Example& ex, std::size_t batch_size, SampleGrad<T>& sg) {
  const auto& shape = p.shape;
  Activations<T> acts;
  sg.latent = example_latent(p, ex);
  forward(p, std::span<const T>(sg.latent), acts);

  const std::size_t n_out = shape.output_voxels();
  const T scale = T(2) / static_cast<T>(static_cast<double>(n_out) * static_cast<double>(batch_size));
  std::vector<T> d_out(n_out);
  double sq = 0.0;
  for (std::size_t v = 0; v < n_out; ++v) {
    const T r = acts.output[v] - static_cast<T>(ex.target[v]);
    sq += static_cast<double>(r) * static_cast<double>(r);
    d_out[v] = scale * r;
  }
  sg.loss = sq / static_cast<double>(n_out);

  // Head: out = sum_c hw[c] * A3[c] + hb.
  const int c3 = shape.stage_channels[2];
  const std::vector<T>& a3 = acts.stage[2];
  sg.d_head_w.assign(c3, T(0));
  T hb = T(0);
  for (std::size_t v = 0; v < n_out; ++v) hb += d_out[v];
  sg.d_head_b = hb;
  std::vector<T> d_act(static_cast<std::size_t>(c3) * n_out);
  for (int c = 0; c < c3; ++c) {
    const T* a = a3.data() + c * n_out;
    T* d = d_act.data() + c * n_out;
    T acc = T(0);
    for (std::size_t v = 0; v < n_out; ++v) {
      acc += d_out[v] * a[v];
      d[v] = a[v] > T(0) ? p.head_weight[c] * d_out[v] : T(0);
    }
    sg.d_head_w[c] = acc;
  }

  std::vector<T> scratch;
  for (int s = GeneratorShape::kStages - 1; s >= 0; --s) {
    const Geometry g = stage_geometry(shape, s);
    const int ci = shape.stage_in_channels(s);
    const int co = shape.stage_channels[s];
    const std::vector<T>& in = s == 0 ? acts.fc : acts.stage[s - 1];
    sg.dw[s].assign(p.deconv_weight[s].size(), T(0));
    sg.db[s].assign(co, T(0));
    std::vector<T> d_in(in.size());
    deconv_backward(g, ci, co, in.data(), p.deconv_weight[s].data(), d_act.data(), sg.dw[s].data(), sg.db[s].data(),
                    d_in.data(), scratch);
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (!(in[i] > T(0))) d_in[i] = T(0);
    }
    d_act = std::move(d_in);
  }

  sg.d_fc = std::move(d_act);
  const auto dim = static_cast<Eigen::Index>(shape.latent_dim);
  const auto fc_out = static_cast<Eigen::Index>(shape.fc_outputs());
  sg.d_latent.resize(dim);
  Eigen::Map<Vec<T>>(sg.d_latent.data(), dim).noalias() =
      ConstRowMap<T>(p.fc_weight.data(), fc_out, dim).transpose() * Eigen::Map<const Vec<T>>(sg.d_fc.data(), fc_out);
}

template <typename F>
void run_parallel(std::size_t n, int threads, F&& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) f(i);
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

}  // namespace

template <typename T>
void forward(const ModelParams<T>& params, std::span<const T> latent, Activations<T>& acts) {
  const auto& shape = params.shape;
  check_latent(params, latent.size());
  const auto dim = static_cast<Eigen::Index>(shape.latent_dim);
  const auto fc_out = static_cast<Eigen::Index>(shape.fc_outputs());

  acts.latent.assign(latent.begin(), latent.end());
  acts.fc.resize(fc_out);
  Eigen::Map<Vec<T>> fc(acts.fc.data(), fc_out);
  fc.noalias() = ConstRowMap<T>(params.fc_weight.data(), fc_out, dim) * Eigen::Map<const Vec<T>>(latent.data(), dim);
  fc += Eigen::Map<const Vec<T>>(params.fc_bias.data(), fc_out);
  fc = fc.cwiseMax(T(0));

  std::vector<T> cols;
  const std::vector<T>* in = &acts.fc;
  for (int s = 0; s < GeneratorShape::kStages; ++s) {
    const Geometry g = stage_geometry(shape, s);
    const int co = shape.stage_channels[s];
    acts.stage[s].resize(static_cast<std::size_t>(co) * g.out_voxels());
    deconv_forward(g, shape.stage_in_channels(s), co, in->data(), params.deconv_weight[s].data(),
                   params.deconv_bias[s].data(), acts.stage[s].data(), cols);
    in = &acts.stage[s];
  }

  const std::size_t n_out = shape.output_voxels();
  acts.output.assign(n_out, params.head_bias[0]);
  for (int c = 0; c < shape.stage_channels[2]; ++c) {
    const T w = params.head_weight[c];
    const T* a = acts.stage[2].data() + c * n_out;
    for (std::size_t v = 0; v < n_out; ++v) acts.output[v] += w * a[v];
  }
}

BrainVolume generate(const ModelParams<float>& params, const GridSpec& grid, std::span<const float> latent) {
  if (grid.dims != params.shape.output_grid()) throw InvalidArgument("grid dims do not match the generator output");
  Activations<float> acts;
  forward(params, latent, acts);
  return BrainVolume(grid, std::move(acts.output));
}

double mse_loss(const BrainVolume& pred, const BrainVolume& target) {
  if (pred.grid.dims != target.grid.dims || pred.data.size() != target.data.size()) {
    throw InvalidArgument("mse_loss: volume dims differ");
  }
  if (pred.data.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double d = static_cast<double>(pred.data[i]) - static_cast<double>(target.data[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(pred.data.size());
}

template <typename T>
double batch_loss(const ModelParams<T>& params, std::span<const Example> batch) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  double total = 0.0;
  Activations<T> acts;
  for (const auto& ex : batch) {
    check_target(params, ex);
    const auto latent = example_latent(params, ex);
    forward(params, std::span<const T>(latent), acts);
    double sq = 0.0;
    for (std::size_t v = 0; v < acts.output.size(); ++v) {
      const double r = static_cast<double>(acts.output[v]) - static_cast<double>(ex.target[v]);
      sq += r * r;
    }
    total += sq / static_cast<double>(acts.output.size());
  }
  return total / static_cast<double>(batch.size());
}

template <typename T>
double backward(const ModelParams<T>& params, std::span<const Example> batch, ModelParams<T>& grads, int threads) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  for (const auto& ex : batch) check_target(params, ex);
  if (!grads.same_layout(params)) grads = params.zeros_like();

  const auto& shape = params.shape;
  std::vector<SampleGrad<T>> per(batch.size());
  run_parallel(batch.size(), threads, [&](std::size_t i) { sample_backward(params, batch[i], batch.size(), per[i]); });

  double loss = 0.0;
  for (const auto& sg : per) loss += sg.loss;
  loss /= static_cast<double>(batch.size());

  // Ordered reduction.
  const auto dim = static_cast<Eigen::Index>(shape.latent_dim);
  const auto fc_out = static_cast<Eigen::Index>(shape.fc_outputs());
  const auto n = static_cast<Eigen::Index>(batch.size());
  RowMat<T> d_fc(n, fc_out);
  RowMat<T> lat(n, dim);
  for (Eigen::Index b = 0; b < n; ++b) {
    d_fc.row(b) = Eigen::Map<const Vec<T>>(per[b].d_fc.data(), fc_out).transpose();
    lat.row(b) = Eigen::Map<const Vec<T>>(per[b].latent.data(), dim).transpose();
  }
  RowMap<T>(grads.fc_weight.data(), fc_out, dim).noalias() = d_fc.transpose() * lat;
  std::fill(grads.fc_bias.begin(), grads.fc_bias.end(), T(0));
  for (int s = 0; s < GeneratorShape::kStages; ++s) {
    std::fill(grads.deconv_weight[s].begin(), grads.deconv_weight[s].end(), T(0));
    std::fill(grads.deconv_bias[s].begin(), grads.deconv_bias[s].end(), T(0));
  }
  std::fill(grads.head_weight.begin(), grads.head_weight.end(), T(0));
  grads.head_bias[0] = T(0);
  std::fill(grads.embedding.begin(), grads.embedding.end(), T(0));

  for (std::size_t b = 0; b < per.size(); ++b) {
    const auto& sg = per[b];
    for (Eigen::Index i = 0; i < fc_out; ++i) grads.fc_bias[i] += sg.d_fc[i];
    for (int s = 0; s < GeneratorShape::kStages; ++s) {
      for (std::size_t i = 0; i < sg.dw[s].size(); ++i) grads.deconv_weight[s][i] += sg.dw[s][i];
      for (std::size_t i = 0; i < sg.db[s].size(); ++i) grads.deconv_bias[s][i] += sg.db[s][i];
    }
    for (std::size_t c = 0; c < sg.d_head_w.size(); ++c) grads.head_weight[c] += sg.d_head_w[c];
    grads.head_bias[0] += sg.d_head_b;

    const auto& ex = batch[b];
    if (params.encoder_kind == EncoderKind::kBaselineHashing && ex.latent.empty() && !ex.tokens.empty()) {
      const T inv_n = T(1) / static_cast<T>(ex.tokens.size());
      for (const auto& tok : ex.tokens) {
        T* row = grads.embedding.data() + token_bucket(tok, params.hash_buckets) * static_cast<std::size_t>(dim);
        for (Eigen::Index i = 0; i < dim; ++i) row[i] += sg.d_latent[i] * inv_n;
      }
    }
  }
  return loss;
}

template void forward(const ModelParams<float>&, std::span<const float>, Activations<float>&);
template void forward(const ModelParams<double>&, std::span<const double>, Activations<double>&);
template double batch_loss(const ModelParams<float>&, std::span<const Example>);
template double batch_loss(const ModelParams<double>&, std::span<const Example>);
template double backward(const ModelParams<float>&, std::span<const Example>, ModelParams<float>&, int);
template double backward(const ModelParams<double>&, std::span<const Example>, ModelParams<double>&, int);

}  // namespace c2b
