#include "affect/core/binary_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

namespace affect::io {

void ByteWriter::le(std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u16(std::uint16_t v) { le(v, 2); }
void ByteWriter::u32(std::uint32_t v) { le(v, 4); }
void ByteWriter::f32(float v) { le(std::bit_cast<std::uint32_t>(v), 4); }
void ByteWriter::f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }

void ByteWriter::short_string(std::string_view s) {
  if (s.size() > UINT16_MAX) throw FormatError("string too long for u16 length prefix");
  u16(static_cast<std::uint16_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void ByteReader::need(std::size_t n) const {
  if (data_.size() - pos_ < n) {
    throw FormatError(what_ + ": truncated at byte " + std::to_string(pos_) + " (need " +
                      std::to_string(n) + " more)");
  }
}

std::uint64_t ByteReader::le(int n) {
  need(static_cast<std::size_t>(n));
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += static_cast<std::size_t>(n);
  return v;
}

void ByteReader::expect_magic(std::string_view m) {
  need(m.size());
  if (std::memcmp(data_.data() + pos_, m.data(), m.size()) != 0) {
    throw FormatError(what_ + ": bad magic, expected \"" + std::string(m) + "\"");
  }
  pos_ += m.size();
}

std::uint8_t ByteReader::u8() { return static_cast<std::uint8_t>(le(1)); }
std::uint16_t ByteReader::u16() { return static_cast<std::uint16_t>(le(2)); }
std::uint32_t ByteReader::u32() { return static_cast<std::uint32_t>(le(4)); }
float ByteReader::f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(le(4))); }
double ByteReader::f64() { return std::bit_cast<double>(le(8)); }

std::string ByteReader::short_string() {
  const std::size_t n = u16();
  auto raw = take(n);
  return {reinterpret_cast<const char*>(raw.data()), raw.size()};
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  need(n);
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

void ByteReader::expect_end() const {
  if (pos_ != data_.size()) {
    throw FormatError(what_ + ": " + std::to_string(data_.size() - pos_) + " trailing bytes");
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace affect::io
