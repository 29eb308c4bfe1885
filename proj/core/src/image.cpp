#include "mdg/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "mdg/error.hpp"

namespace mdg {

namespace {

class PnmHeader {
 public:
  explicit PnmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      throw ParseError(std::string("PNM: expected ") + what + " in header");
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 24)) throw ParseError(std::string("PNM: ") + what + " out of range");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw ParseError("PNM: missing whitespace after maxval");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

RasterImage decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5'))
    throw ParseError("PNM: bad magic, expected P6 or P5");
  const std::size_t channels = bytes[1] == '6' ? 3 : 1;
  PnmHeader header(bytes);
  header.advance(2);
  const std::size_t width = header.number("width");
  const std::size_t height = header.number("height");
  const std::size_t maxval = header.number("maxval");
  if (width == 0 || height == 0) throw ParseError("PNM: zero dimension");
  if (maxval != 255) throw ParseError("PNM: only maxval 255 is supported");
  header.single_space();
  const std::size_t expected = width * height * channels;
  if (bytes.size() - header.pos() != expected)
    throw ParseError("PNM: raster has " + std::to_string(bytes.size() - header.pos()) + " bytes, expected " +
                     std::to_string(expected));
  RasterImage image(height, width, channels);
  for (std::size_t i = 0; i < expected; ++i) image.data[i] = bytes[header.pos() + i] / 255.0;
  return image;
}

io::Bytes encode_pnm(const RasterImage& image) {
  require(image.channels == 1 || image.channels == 3, "encode_pnm: channels must be 1 or 3");
  require(!image.empty() && image.data.size() == image.height * image.width * image.channels,
          "encode_pnm: malformed image");
  const std::string header = std::string(image.channels == 3 ? "P6" : "P5") + "\n" + std::to_string(image.width) +
                             " " + std::to_string(image.height) + "\n255\n";
  io::Bytes out(header.begin(), header.end());
  out.reserve(out.size() + image.data.size());
  for (double v : image.data) out.push_back(to_byte(v));
  return out;
}

io::Bytes encode_mask_pgm(std::size_t height, std::size_t width, const std::vector<std::uint8_t>& mask) {
  require(mask.size() == height * width, "encode_mask_pgm: mask size mismatch");
  RasterImage image(height, width, 1);
  for (std::size_t i = 0; i < mask.size(); ++i) image.data[i] = mask[i] ? 1.0 : 0.0;
  return encode_pnm(image);
}

}  // namespace mdg
