#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affect/core/error.hpp"

namespace affect::io {

// Little-endian byte writer for the AF* container formats.
class ByteWriter {
 public:
  void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void magic(std::string_view m) { buf_.insert(buf_.end(), m.begin(), m.end()); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  // u16 length prefix followed by the raw UTF-8 bytes.
  void short_string(std::string_view s);

  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  void le(std::uint64_t v, int n);
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked little-endian reader; every overrun raises FormatError
// tagged with `what`.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string what)
      : data_(data), what_(std::move(what)) {}

  void expect_magic(std::string_view m);
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  float f32();
  double f64();
  std::string short_string();
  std::span<const std::uint8_t> take(std::size_t n);

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  void expect_end() const;

 private:
  std::uint64_t le(int n);
  void need(std::size_t n) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace affect::io
