#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bevkit/rasterizer.hpp"
#include "bevkit/voxel_pool.hpp"

namespace bevkit {

// Dense float32 arrays on disk:
//   "BEVT" | u8 version = 1 | u8 dtype = 0 (f32 LE) | u32 ndim | u32 dims[ndim] | payload
// All integers little-endian, payload row-major.
inline constexpr std::uint8_t kTensorVersion = 1;
inline constexpr std::uint8_t kTensorDtypeF32 = 0;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::string encode_tensor(const Tensor& t);
/// Throws kBadMagic, kBadVersion, kBadDtype or kTruncated. Trailing bytes
/// after the payload are reported as kTruncated too (size mismatch).
Tensor decode_tensor(const std::string& bytes);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

/// ProbMap <-> [rows, cols].
Tensor to_tensor(const ProbMap& m);
ProbMap prob_map_from_tensor(const Tensor& t, BevGridSpec grid = {});
/// BevTensor -> [bins * channels_per_bin, rows, cols].
Tensor to_tensor(const BevTensor& t);

}  // namespace bevkit
