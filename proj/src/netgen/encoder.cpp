#include "c2b/netgen.hpp"
#include "c2b/random.hpp"

namespace c2b {

std::uint64_t token_bucket(std::string_view token, int hash_buckets) {
  return fnv1a64(token) % static_cast<std::uint64_t>(hash_buckets);
}

template <typename T>
std::vector<T> encode(const ModelParams<T>& params, std::span<const std::string> tokens) {
  const auto dim = static_cast<std::size_t>(params.shape.latent_dim);
  std::vector<T> latent(dim, T(0));
  if (tokens.empty() || params.encoder_kind != EncoderKind::kBaselineHashing) return latent;
  for (const auto& tok : tokens) {
    const T* row = params.embedding.data() + token_bucket(tok, params.hash_buckets) * dim;
    for (std::size_t i = 0; i < dim; ++i) latent[i] += row[i];
  }
  const T n = static_cast<T>(tokens.size());
  for (auto& v : latent) v /= n;
  return latent;
}

template std::vector<float> encode(const ModelParams<float>&, std::span<const std::string>);
template std::vector<double> encode(const ModelParams<double>&, std::span<const std::string>);

}  // namespace c2b
