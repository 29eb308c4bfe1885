#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mdg/binary_io.hpp"

namespace mdg {

/// Interleaved row-major image with intensities in [0, 1].
struct RasterImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;  // 1 or 3
  std::vector<double> data;

  RasterImage() = default;
  RasterImage(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
      : height(h), width(w), channels(c), data(h * w * c, fill) {}

  double& at(std::size_t row, std::size_t col, std::size_t ch) { return data[(row * width + col) * channels + ch]; }
  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data[(row * width + col) * channels + ch];
  }
  bool empty() const { return data.empty(); }
};

/// Binary PNM: P6 for 3 channels, P5 for 1 channel, maxval 255. Values are
/// stored as byte/255 so decode -> encode reproduces the input bytes.
RasterImage decode_pnm(std::span<const std::uint8_t> bytes);
io::Bytes encode_pnm(const RasterImage& image);

/// Mask as a P5 image: true -> 255, false -> 0.
io::Bytes encode_mask_pgm(std::size_t height, std::size_t width, const std::vector<std::uint8_t>& mask);

}  // namespace mdg
