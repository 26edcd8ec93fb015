#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "c2b/volgrid.hpp"

namespace c2b {

enum class SliceAxis { kX, kY, kZ };
SliceAxis parse_slice_axis(char c);

/// Binary PGM ("P5", maxval 255) of slice `index` along `axis`. Intensities
/// are min-max normalized over the whole volume (a constant volume renders
/// black). Image columns follow the first remaining axis (x for y/z slices,
/// y for x slices); rows run from the highest index of the second remaining
/// axis down, so superior/anterior is at the top.
std::vector<std::uint8_t> render_slice_pgm(const BrainVolume& volume, SliceAxis axis, int index);

/// Writes one PGM per slice as "<axis>_<index>.pgm" with the index padded to
/// at least three digits. Returns the paths in slice order. Throws IoError
/// when the directory cannot be created or written.
std::vector<std::filesystem::path> render_slices(const BrainVolume& volume, SliceAxis axis,
                                                 const std::filesystem::path& out_dir);

}  // namespace c2b
