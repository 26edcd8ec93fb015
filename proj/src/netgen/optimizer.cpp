#include "c2b/optimizer.hpp"

#include <cmath>

#include "c2b/error.hpp"

namespace c2b {

void AdamWConfig::validate() const {
  if (!(lr_encoder > 0.0) || !(lr_generator > 0.0)) throw InvalidArgument("learning rates must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidArgument("betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw InvalidArgument("eps must be > 0");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("weight_decay must be >= 0");
}

template <typename T>
void adamw_step(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v, std::uint64_t step,
                double lr, const AdamWConfig& config) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw InvalidArgument("adamw_step: block sizes differ");
  }
  if (step == 0) throw InvalidArgument("adamw_step: step is 1-based");
  // Scalars in double; the element loop runs in T so it vectorizes.
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  const T b1 = static_cast<T>(config.beta1);
  const T b2 = static_cast<T>(config.beta2);
  const T one_b1 = static_cast<T>(1.0 - config.beta1);
  const T one_b2 = static_cast<T>(1.0 - config.beta2);
  const T keep = static_cast<T>(1.0 - lr * config.weight_decay);
  const T step_size = static_cast<T>(lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(config.eps);
  T* __restrict pp = params.data();
  const T* __restrict gp = grads.data();
  T* __restrict mp = m.data();
  T* __restrict vp = v.data();
  const std::size_t n = params.size();
  for (std::size_t i = 0; i < n; ++i) {
    const T g = gp[i];
    const T mi = b1 * mp[i] + one_b1 * g;
    const T vi = b2 * vp[i] + one_b2 * g * g;
    mp[i] = mi;
    vp[i] = vi;
    pp[i] = keep * pp[i] - step_size * mi / (std::sqrt(vi * inv_c2) + eps);
  }
}

template <typename T>
void adamw_update(ModelParams<T>& params, const ModelParams<T>& grads, OptimizerState<T>& state,
                  const AdamWConfig& config) {
  if (!grads.same_layout(params) || !state.m.same_layout(params) || !state.v.same_layout(params)) {
    throw InvalidArgument("adamw_update: gradient or moment layout differs from the parameters");
  }
  ++state.step;
  auto pb = params.blocks();
  const auto gb = grads.blocks();
  auto mb = state.m.blocks();
  auto vb = state.v.blocks();
  for (std::size_t i = 0; i < pb.size(); ++i) {
    const double lr = pb[i].group == ParamGroup::kEncoder ? config.lr_encoder : config.lr_generator;
    adamw_step<T>(pb[i].values, gb[i].values, mb[i].values, vb[i].values, state.step, lr, config);
  }
}

template void adamw_step<float>(std::span<float>, std::span<const float>, std::span<float>, std::span<float>,
                                std::uint64_t, double, const AdamWConfig&);
template void adamw_step<double>(std::span<double>, std::span<const double>, std::span<double>, std::span<double>,
                                 std::uint64_t, double, const AdamWConfig&);
template void adamw_update(ModelParams<float>&, const ModelParams<float>&, OptimizerState<float>&,
                           const AdamWConfig&);
template void adamw_update(ModelParams<double>&, const ModelParams<double>&, OptimizerState<double>&,
                           const AdamWConfig&);

}  // namespace c2b
