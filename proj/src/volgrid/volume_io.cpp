#include "c2b/volume_io.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "c2b/binary_io.hpp"
#include "c2b/error.hpp"

namespace c2b {

namespace {

constexpr std::size_t kNativeHeaderBytes = 16 + 3 * 4 + 6 * 8;
constexpr std::int32_t kNiftiHeaderSize = 348;
constexpr std::size_t kNiftiVoxOffset = 352;
constexpr std::int16_t kNiftiFloat32 = 16;
constexpr std::int16_t kNiftiXformMni152 = 4;
constexpr std::uint8_t kNiftiUnitsMm = 2;

// Byte offsets of the NIfTI-1 header fields used here.
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffSformCode = 254;
constexpr std::size_t kOffSrowX = 280;
constexpr std::size_t kOffMagic = 344;

void check_grid_for_io(const GridSpec& grid) {
  grid.validate();
}

}  // namespace

std::vector<std::uint8_t> encode_native(const BrainVolume& volume) {
  check_grid_for_io(volume.grid);
  if (volume.data.size() != volume.grid.voxel_count()) throw InvalidArgument("volume data length mismatch");
  ByteWriter w;
  w.raw(std::string_view(kNativeVolumeMagic, 8));
  w.zeros(8);
  for (int d : volume.grid.dims) w.u32(static_cast<std::uint32_t>(d));
  for (double v : volume.grid.voxel_size_mm) w.f64(v);
  for (double v : volume.grid.origin_mm) w.f64(v);
  w.f32_array(volume.data);
  return w.take();
}

BrainVolume decode_native(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "c2bvol");
  if (bytes.size() < kNativeHeaderBytes) throw FormatError("header", "file shorter than native header");
  const std::string magic = r.raw(16);
  if (std::memcmp(magic.data(), kNativeVolumeMagic, 8) != 0 || magic.find_first_not_of('\0', 8) != std::string::npos) {
    throw FormatError("magic", "not a C2BVOL01 volume");
  }
  GridSpec grid;
  for (int a = 0; a < 3; ++a) {
    const std::uint32_t d = r.u32();
    if (d == 0 || d > (1u << 16)) throw FormatError("dims", "unsupported dimension " + std::to_string(d));
    grid.dims[a] = static_cast<int>(d);
  }
  for (auto& v : grid.voxel_size_mm) v = r.f64();
  for (auto& v : grid.origin_mm) v = r.f64();
  try {
    grid.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError("geometry", e.what());
  }
  const std::size_t expected = grid.voxel_count() * sizeof(float);
  if (r.remaining() != expected) {
    throw FormatError("payload", "expected " + std::to_string(expected) + " bytes, found " +
                                     std::to_string(r.remaining()));
  }
  BrainVolume out(grid);
  r.f32_array(out.data);
  return out;
}

void save_native(const BrainVolume& volume, const std::filesystem::path& path) {
  write_file_bytes(path, encode_native(volume));
}

BrainVolume load_native(const std::filesystem::path& path) {
  return decode_native(read_file_bytes(path));
}

std::vector<std::uint8_t> encode_nifti(const BrainVolume& volume) {
  check_grid_for_io(volume.grid);
  const GridSpec& g = volume.grid;
  for (int d : g.dims) {
    if (d > 32767) throw InvalidArgument("NIfTI-1 dims are limited to 32767");
  }
  ByteWriter w;
  w.buffer().reserve(kNiftiVoxOffset + volume.data.size() * 4);
  w.zeros(kNiftiHeaderSize);
  auto& buf = w.buffer();
  auto put_i16 = [&](std::size_t off, std::int16_t v) {
    buf[off] = static_cast<std::uint8_t>(v);
    buf[off + 1] = static_cast<std::uint8_t>(static_cast<std::uint16_t>(v) >> 8);
  };
  auto put_i32 = [&](std::size_t off, std::int32_t v) {
    for (int i = 0; i < 4; ++i) buf[off + i] = static_cast<std::uint8_t>(static_cast<std::uint32_t>(v) >> (8 * i));
  };
  auto put_f32 = [&](std::size_t off, float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    put_i32(off, static_cast<std::int32_t>(u));
  };

  put_i32(0, kNiftiHeaderSize);
  buf[39] = 0;  // dim_info
  const std::int16_t dim[8] = {3, static_cast<std::int16_t>(g.dims[0]), static_cast<std::int16_t>(g.dims[1]),
                               static_cast<std::int16_t>(g.dims[2]), 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) put_i16(kOffDim + 2 * i, dim[i]);
  put_i16(kOffDatatype, kNiftiFloat32);
  put_i16(kOffBitpix, 32);
  const float pixdim[8] = {1.0f, static_cast<float>(g.voxel_size_mm[0]), static_cast<float>(g.voxel_size_mm[1]),
                           static_cast<float>(g.voxel_size_mm[2]), 0.0f, 0.0f, 0.0f, 0.0f};
  for (int i = 0; i < 8; ++i) put_f32(kOffPixdim + 4 * i, pixdim[i]);
  put_f32(kOffVoxOffset, static_cast<float>(kNiftiVoxOffset));
  put_f32(kOffSclSlope, 1.0f);
  buf[kOffXyztUnits] = kNiftiUnitsMm;
  put_i16(kOffSformCode, kNiftiXformMni152);
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 4; ++col) {
      float v = 0.0f;
      if (col == row) v = static_cast<float>(g.voxel_size_mm[row]);
      if (col == 3) v = static_cast<float>(g.origin_mm[row]);
      put_f32(kOffSrowX + 16 * row + 4 * col, v);
    }
  }
  std::memcpy(buf.data() + kOffMagic, "n+1\0", 4);
  w.zeros(4);  // no extensions
  w.f32_array(volume.data);
  return w.take();
}

BrainVolume decode_nifti(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < static_cast<std::size_t>(kNiftiHeaderSize)) {
    throw FormatError("sizeof_hdr", "file shorter than 348-byte header");
  }
  ByteReader r(bytes, "nifti");
  const std::int32_t sizeof_hdr = r.i32();
  if (sizeof_hdr != kNiftiHeaderSize) {
    throw FormatError("sizeof_hdr", "expected 348, found " + std::to_string(sizeof_hdr) +
                                        " (big-endian files are not supported)");
  }
  r.seek(kOffMagic);
  const std::string magic = r.raw(4);
  if (magic != std::string("n+1\0", 4)) throw FormatError("magic", "expected \"n+1\\0\"");

  r.seek(kOffDim);
  std::int16_t dim[8];
  for (auto& d : dim) d = r.i16();
  if (dim[0] < 3 || dim[0] > 7) throw FormatError("dim", "dim[0] must be 3 (found " + std::to_string(dim[0]) + ")");
  for (int i = 1; i <= 3; ++i) {
    if (dim[i] < 1) throw FormatError("dim", "non-positive spatial dimension");
  }
  for (int i = 4; i <= dim[0]; ++i) {
    if (dim[i] != 1) throw FormatError("dim", "only 3-D volumes are supported");
  }

  r.seek(kOffDatatype);
  const std::int16_t datatype = r.i16();
  const std::int16_t bitpix = r.i16();
  if (datatype != kNiftiFloat32) throw FormatError("datatype", "only FLOAT32 (16) is supported, found " + std::to_string(datatype));
  if (bitpix != 32) throw FormatError("bitpix", "expected 32");

  r.seek(kOffPixdim);
  float pixdim[8];
  for (auto& p : pixdim) p = r.f32();
  r.seek(kOffVoxOffset);
  const float vox_offset = r.f32();
  if (!(vox_offset >= static_cast<float>(kNiftiHeaderSize)) || vox_offset != std::floor(vox_offset)) {
    throw FormatError("vox_offset", "invalid voxel offset");
  }

  r.seek(kOffSformCode);
  const std::int16_t sform_code = r.i16();
  if (sform_code <= 0) throw FormatError("sform_code", "an sform is required");
  r.seek(kOffSrowX);
  float srow[3][4];
  for (auto& row : srow) {
    for (auto& v : row) v = r.f32();
  }
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      if (col != row && srow[row][col] != 0.0f) throw FormatError("srow", "only axis-aligned sforms are supported");
    }
  }

  GridSpec grid;
  for (int a = 0; a < 3; ++a) {
    grid.dims[a] = dim[a + 1];
    grid.voxel_size_mm[a] = pixdim[a + 1];
    grid.origin_mm[a] = srow[a][3];
  }
  try {
    grid.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError("pixdim", e.what());
  }

  const std::size_t offset = static_cast<std::size_t>(vox_offset);
  const std::size_t expected = grid.voxel_count() * sizeof(float);
  if (bytes.size() < offset || bytes.size() - offset < expected) {
    const std::size_t have = bytes.size() > offset ? bytes.size() - offset : 0;
    throw FormatError("payload", "expected " + std::to_string(expected) + " bytes, found " + std::to_string(have));
  }
  r.seek(offset);
  BrainVolume out(grid);
  r.f32_array(out.data);
  return out;
}

void export_nifti(const BrainVolume& volume, const std::filesystem::path& path) {
  write_file_bytes(path, encode_nifti(volume));
}

BrainVolume import_nifti(const std::filesystem::path& path) {
  return decode_nifti(read_file_bytes(path));
}

}  // namespace c2b
