#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mdg::io {

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

/// Little-endian append-only encoder.
class Writer {
 public:
  void magic(std::string_view four_cc);
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void raw(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }

  const Bytes& bytes() const { return bytes_; }
  Bytes take() { return std::move(bytes_); }

 private:
  Bytes bytes_;
};

/// Little-endian cursor over a byte span. Every read past the end throws
/// ParseError naming `what` and the `context` given at construction.
class Reader {
 public:
  Reader(std::span<const std::uint8_t> data, std::string context)
      : data_(data), context_(std::move(context)) {}

  void expect_magic(std::string_view four_cc);
  std::uint32_t u32(const char* what);
  std::uint16_t u16(const char* what);
  float f32(const char* what);
  double f64(const char* what);
  std::uint8_t u8(const char* what);
  std::span<const std::uint8_t> take(std::size_t n, const char* what);

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  void expect_end() const;
  [[noreturn]] void fail(const std::string& message) const;

 private:
  void need(std::size_t n, const char* what) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string context_;
};

}  // namespace mdg::io
