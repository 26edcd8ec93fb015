#include "c2b/error.hpp"
#include "c2b/metrics.hpp"
#include "c2b/random.hpp"

namespace c2b {

std::vector<std::string> mask_tokens(const std::vector<std::string>& tokens, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("mask rate must lie in [0, 1]");
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(rng.uniform01() < rate ? std::string(kMaskToken) : t);
  return out;
}

}  // namespace c2b
