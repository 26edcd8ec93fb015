#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace c2b {

/// Regular voxel grid in MNI millimetre space. `origin_mm` is the world
/// position of the centre of voxel (0,0,0); axes are aligned with x/y/z.
/// The defaults enclose the MNI152 brain at 4 mm resolution.
struct GridSpec {
  std::array<int, 3> dims{40, 48, 40};
  std::array<double, 3> voxel_size_mm{4.0, 4.0, 4.0};
  std::array<double, 3> origin_mm{-78.0, -110.0, -72.0};

  /// Throws InvalidArgument unless dims >= 1 and voxel sizes > 0.
  void validate() const;
  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  /// x-fastest linear order.
  std::size_t linear_index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) + static_cast<std::size_t>(dims[0]) * (y + static_cast<std::size_t>(dims[1]) * z);
  }
  std::array<double, 3> voxel_center_mm(int x, int y, int z) const;

  bool operator==(const GridSpec&) const = default;
};

struct PeakCoordinate {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double z_mm = 0.0;

  bool operator==(const PeakCoordinate&) const = default;
};

/// Dense activation volume, x-fastest, 32-bit values.
struct BrainVolume {
  GridSpec grid;
  std::vector<float> data;

  BrainVolume() : data(grid.voxel_count(), 0.0f) {}
  explicit BrainVolume(const GridSpec& g) : grid(g), data(g.voxel_count(), 0.0f) {}
  BrainVolume(const GridSpec& g, std::vector<float> values);

  float& at(int x, int y, int z) { return data[grid.linear_index(x, y, z)]; }
  float at(int x, int y, int z) const { return data[grid.linear_index(x, y, z)]; }
  std::size_t size() const { return data.size(); }

  bool operator==(const BrainVolume&) const = default;
};

/// Continuous voxel coordinate (no rounding, no clipping).
std::array<double, 3> world_to_voxel(const GridSpec& grid, const PeakCoordinate& c);

/// sigma = fwhm / (2 sqrt(2 ln 2)).
double fwhm_to_sigma(double fwhm_mm);

/// Unit-peak isotropic Gaussian evaluated at `distance_mm` from its centre.
double gaussian_kernel(double distance_mm, double fwhm_mm);

/// Places a unit Gaussian sphere at every coordinate, sums them and rescales
/// so the maximum voxel is exactly 1. Empty input gives an all-zero volume.
/// Peaks outside the grid still contribute their tails.
BrainVolume synthesize_target(const GridSpec& grid, std::span<const PeakCoordinate> coords,
                              double fwhm_mm = 9.0);

}  // namespace c2b
