#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "c2b/error.hpp"
#include "c2b/volgrid.hpp"

namespace c2b {

void GridSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 1) throw InvalidArgument("grid dims must be >= 1 (axis " + std::to_string(a) + ")");
    if (!(voxel_size_mm[a] > 0.0) || !std::isfinite(voxel_size_mm[a])) {
      throw InvalidArgument("voxel size must be positive (axis " + std::to_string(a) + ")");
    }
    if (!std::isfinite(origin_mm[a])) throw InvalidArgument("origin must be finite");
  }
}

std::array<double, 3> GridSpec::voxel_center_mm(int x, int y, int z) const {
  return {origin_mm[0] + x * voxel_size_mm[0], origin_mm[1] + y * voxel_size_mm[1],
          origin_mm[2] + z * voxel_size_mm[2]};
}

BrainVolume::BrainVolume(const GridSpec& g, std::vector<float> values) : grid(g), data(std::move(values)) {
  if (data.size() != grid.voxel_count()) {
    throw InvalidArgument("volume data length " + std::to_string(data.size()) + " does not match grid (" +
                          std::to_string(grid.voxel_count()) + ")");
  }
}

std::array<double, 3> world_to_voxel(const GridSpec& grid, const PeakCoordinate& c) {
  const std::array<double, 3> w{c.x_mm, c.y_mm, c.z_mm};
  std::array<double, 3> v{};
  for (int a = 0; a < 3; ++a) {
    if (!std::isfinite(w[a])) throw InvalidArgument("coordinate is not finite");
    v[a] = (w[a] - grid.origin_mm[a]) / grid.voxel_size_mm[a];
  }
  return v;
}

double fwhm_to_sigma(double fwhm_mm) {
  return fwhm_mm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

double gaussian_kernel(double distance_mm, double fwhm_mm) {
  if (!(fwhm_mm > 0.0)) throw InvalidArgument("fwhm must be positive");
  const double sigma = fwhm_to_sigma(fwhm_mm);
  return std::exp(-(distance_mm * distance_mm) / (2.0 * sigma * sigma));
}

BrainVolume synthesize_target(const GridSpec& grid, std::span<const PeakCoordinate> coords, double fwhm_mm) {
  if (!(fwhm_mm > 0.0) || !std::isfinite(fwhm_mm)) throw InvalidArgument("fwhm must be positive");
  grid.validate();
  for (const auto& c : coords) {
    if (!std::isfinite(c.x_mm) || !std::isfinite(c.y_mm) || !std::isfinite(c.z_mm)) {
      throw InvalidArgument("coordinate is not finite");
    }
  }

  BrainVolume out(grid);
  if (coords.empty()) return out;

  const double sigma = fwhm_to_sigma(fwhm_mm);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> raw(grid.voxel_count(), 0.0);
  for (int z = 0; z < grid.dims[2]; ++z) {
    for (int y = 0; y < grid.dims[1]; ++y) {
      for (int x = 0; x < grid.dims[0]; ++x) {
        const auto p = grid.voxel_center_mm(x, y, z);
        double sum = 0.0;
        for (const auto& c : coords) {
          const double dx = p[0] - c.x_mm;
          const double dy = p[1] - c.y_mm;
          const double dz = p[2] - c.z_mm;
          sum += std::exp(-(dx * dx + dy * dy + dz * dz) * inv_two_var);
        }
        raw[grid.linear_index(x, y, z)] = sum;
      }
    }
  }

  const double peak = *std::max_element(raw.begin(), raw.end());
  if (peak > 0.0) {
    for (std::size_t i = 0; i < raw.size(); ++i) out.data[i] = static_cast<float>(raw[i] / peak);
  }
  return out;
}

}  // namespace c2b
