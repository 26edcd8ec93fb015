#include "c2b/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "c2b/binary_io.hpp"
#include "c2b/error.hpp"

namespace c2b {

SliceAxis parse_slice_axis(char c) {
  switch (c) {
    case 'x': return SliceAxis::kX;
    case 'y': return SliceAxis::kY;
    case 'z': return SliceAxis::kZ;
    default: throw InvalidArgument(std::string("axis must be x, y or z, got ") + c);
  }
}

namespace {

int axis_index(SliceAxis a) { return a == SliceAxis::kX ? 0 : a == SliceAxis::kY ? 1 : 2; }

// (column axis, row axis) for a slice normal to `axis`.
std::pair<int, int> plane_axes(SliceAxis axis) {
  switch (axis) {
    case SliceAxis::kX: return {1, 2};
    case SliceAxis::kY: return {0, 2};
    case SliceAxis::kZ: return {0, 1};
  }
  return {0, 1};
}

}  // namespace

std::vector<std::uint8_t> render_slice_pgm(const BrainVolume& volume, SliceAxis axis, int index) {
  const auto& dims = volume.grid.dims;
  const int a = axis_index(axis);
  if (index < 0 || index >= dims[a]) throw InvalidArgument("slice index out of range");
  const auto [cu, cv] = plane_axes(axis);
  const int width = dims[cu];
  const int height = dims[cv];

  float lo = 0.0f, hi = 0.0f;
  if (!volume.data.empty()) {
    const auto [mn, mx] = std::minmax_element(volume.data.begin(), volume.data.end());
    lo = *mn;
    hi = *mx;
  }
  const double range = static_cast<double>(hi) - static_cast<double>(lo);

  const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + static_cast<std::size_t>(width) * height);
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      std::array<int, 3> p{};
      p[a] = index;
      p[cu] = col;
      p[cv] = height - 1 - row;
      const double v = volume.data[volume.grid.linear_index(p[0], p[1], p[2])];
      std::uint8_t px = 0;
      if (range > 0.0 && std::isfinite(range)) {
        px = static_cast<std::uint8_t>(std::lround(std::clamp((v - lo) / range, 0.0, 1.0) * 255.0));
      }
      out.push_back(px);
    }
  }
  return out;
}

std::vector<std::filesystem::path> render_slices(const BrainVolume& volume, SliceAxis axis,
                                                 const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const int n = volume.grid.dims[axis_index(axis)];
  const int digits = std::max<int>(3, static_cast<int>(std::to_string(n - 1).size()));
  const char name = "xyz"[axis_index(axis)];
  std::vector<std::filesystem::path> paths;
  for (int i = 0; i < n; ++i) {
    std::string idx = std::to_string(i);
    idx.insert(0, static_cast<std::size_t>(digits) - idx.size(), '0');
    auto path = out_dir / (std::string(1, name) + "_" + idx + ".pgm");
    write_file_bytes(path, render_slice_pgm(volume, axis, i));
    paths.push_back(std::move(path));
  }
  return paths;
}

}  // namespace c2b
