#pragma once

#include <cstdint>
#include <string>

#include "c2b/netgen.hpp"

namespace c2b {

enum class Precision { kFloat32, kFloat64 };

struct GradCheckConfig {
  GeneratorShape shape = GeneratorShape::tiny();
  int hash_buckets = 16;
  int batch_size = 2;
  /// Parameters compared (drawn uniformly without replacement).
  int parameters = 256;
  double step = 1e-3;
  /// Denominator floor of the relative error.
  double floor = 1e-6;
  Precision precision = Precision::kFloat64;
  std::uint64_t seed = 1;
};

struct GradCheckReport {
  std::size_t parameter_count = 0;
  std::size_t checked = 0;
  /// Draws whose +/- step changed some rectifier's on/off state; the loss is
  /// not differentiable across such a kink, so they are not compared.
  std::size_t skipped_kinks = 0;
  double max_rel_error = 0.0;
  std::string worst_block;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Central finite differences (64-bit model, 64-bit loss accumulation) versus
/// the analytic gradient computed in the requested precision, on a random
/// small model and synthetic batch. The loss difference is accumulated per
/// voxel, which keeps round-off far below the tolerances. Relative error is
/// |a - n| / max(|a|, |n|, floor). Throws InvalidArgument when the model has
/// more than 10^4 parameters.
GradCheckReport gradient_check(const GradCheckConfig& config);

}  // namespace c2b
