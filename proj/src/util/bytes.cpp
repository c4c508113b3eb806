#include "dlacb/util/bytes.hpp"

#include <bit>
#include <cstring>

#include "dlacb/util/codec.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb {

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw FormatError("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw FormatError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Encoder& Encoder::u8(std::uint8_t v) {
  buf_.push_back(v);
  return *this;
}

Encoder& Encoder::u16(std::uint16_t v) {
  buf_.push_back(static_cast<std::uint8_t>(v >> 8));
  buf_.push_back(static_cast<std::uint8_t>(v));
  return *this;
}

Encoder& Encoder::u32(std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
  return *this;
}

Encoder& Encoder::u64(std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
  return *this;
}

Encoder& Encoder::f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }

Encoder& Encoder::raw(ByteView v) {
  buf_.insert(buf_.end(), v.begin(), v.end());
  return *this;
}

Encoder& Encoder::bytes(ByteView v) {
  u32(static_cast<std::uint32_t>(v.size()));
  return raw(v);
}

Encoder& Encoder::str(std::string_view s) { return bytes(as_bytes(s)); }

ByteView Decoder::take(std::size_t n) {
  if (remaining() < n) throw FormatError("truncated input");
  ByteView out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t Decoder::u8() { return take(1)[0]; }

std::uint16_t Decoder::u16() {
  auto b = take(2);
  return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t Decoder::u32() {
  auto b = take(4);
  std::uint32_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

std::uint64_t Decoder::u64() {
  auto b = take(8);
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

bool Decoder::boolean() {
  auto v = u8();
  if (v > 1) throw FormatError("non-canonical boolean");
  return v == 1;
}

double Decoder::f64() { return std::bit_cast<double>(u64()); }

Bytes Decoder::raw(std::size_t n) {
  auto v = take(n);
  return Bytes(v.begin(), v.end());
}

Bytes Decoder::bytes(std::size_t max_len) {
  auto n = u32();
  if (n > max_len) throw FormatError("length prefix exceeds limit");
  return raw(n);
}

std::string Decoder::str(std::size_t max_len) {
  auto b = bytes(max_len);
  return std::string(b.begin(), b.end());
}

void Decoder::finish() const {
  if (!empty()) throw FormatError("trailing bytes after record");
}

}  // namespace dlacb
