#include "mdg/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mdg/error.hpp"

namespace mdg::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgument("short write to '" + path + "'");
}

void Writer::magic(std::string_view four_cc) {
  for (char c : four_cc) bytes_.push_back(static_cast<std::uint8_t>(c));
}

void Writer::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void Writer::f64(double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void Reader::fail(const std::string& message) const {
  throw ParseError(context_ + ": " + message + " (offset " + std::to_string(pos_) + ")");
}

void Reader::need(std::size_t n, const char* what) const {
  if (remaining() < n) fail(std::string("truncated while reading ") + what);
}

void Reader::expect_magic(std::string_view four_cc) {
  need(four_cc.size(), "magic");
  if (std::memcmp(data_.data() + pos_, four_cc.data(), four_cc.size()) != 0)
    fail("bad magic, expected '" + std::string(four_cc) + "'");
  pos_ += four_cc.size();
}

std::uint32_t Reader::u32(const char* what) {
  need(4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint16_t Reader::u16(const char* what) {
  need(2, what);
  const auto v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
  pos_ += 2;
  return v;
}

float Reader::f32(const char* what) { return std::bit_cast<float>(u32(what)); }

double Reader::f64(const char* what) {
  need(8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return std::bit_cast<double>(v);
}

std::uint8_t Reader::u8(const char* what) {
  need(1, what);
  return data_[pos_++];
}

std::span<const std::uint8_t> Reader::take(std::size_t n, const char* what) {
  need(n, what);
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

void Reader::expect_end() const {
  if (remaining() != 0) fail(std::to_string(remaining()) + " unexpected trailing bytes");
}

}  // namespace mdg::io
