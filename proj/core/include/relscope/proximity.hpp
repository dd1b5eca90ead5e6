#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace relscope {

/// Channel-major C x H x W tensor, as produced by the proximity model's
/// last convolutional layer.
struct ProximityTensor {
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> values;

  float at(std::uint32_t c, std::uint32_t i, std::uint32_t j) const {
    return values[(static_cast<std::size_t>(c) * height + i) * width + j];
  }
};

inline constexpr std::array<std::uint32_t, 3> kProximityShape{338, 50, 50};

/// Max over the channel axis, flattened row-major: out[i*W + j] =
/// max_c t[c][i][j]. The tensor must have exactly the `expected` shape
/// (ShapeError otherwise); toy shapes are for tests.
std::vector<double> pool_proximity(const ProximityTensor& tensor,
                                   std::array<std::uint32_t, 3> expected = kProximityShape);

/// Binary layout: magic `PRX1`, three little-endian u32 dims (C, H, W),
/// then C*H*W little-endian IEEE-754 binary32 values.
ProximityTensor read_proximity(std::istream& in);
ProximityTensor read_proximity(const std::filesystem::path& path);
void write_proximity(std::ostream& out, const ProximityTensor& tensor);
void write_proximity(const std::filesystem::path& path, const ProximityTensor& tensor);

}  // namespace relscope
