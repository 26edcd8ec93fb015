#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "c2b/volgrid.hpp"

namespace c2b {

// Native ".c2bvol" layout (little-endian):
//   [0,16)   "C2BVOL01" + 8 zero bytes
//   3 x u32  dims
//   3 x f64  voxel size (mm), 3 x f64 origin (mm)
//   N x f32  voxel data, x-fastest
inline constexpr char kNativeVolumeMagic[] = "C2BVOL01";

std::vector<std::uint8_t> encode_native(const BrainVolume& volume);
BrainVolume decode_native(std::span<const std::uint8_t> bytes);
void save_native(const BrainVolume& volume, const std::filesystem::path& path);
BrainVolume load_native(const std::filesystem::path& path);

// NIfTI-1 single-file subset: 348-byte header, 4-byte empty extension flag,
// float32 voxel data at vox_offset 352. Axis-aligned sform (MNI152 code).
// Import accepts exactly what export writes: little-endian, "n+1\0",
// 3-D (trailing unit dims allowed), datatype 16.
std::vector<std::uint8_t> encode_nifti(const BrainVolume& volume);
BrainVolume decode_nifti(std::span<const std::uint8_t> bytes);
void export_nifti(const BrainVolume& volume, const std::filesystem::path& path);
BrainVolume import_nifti(const std::filesystem::path& path);

}  // namespace c2b
