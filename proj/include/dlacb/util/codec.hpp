#pragma once

// Canonical binary encoding: fields in fixed order, integers big-endian fixed
// width, variable-length byte strings and UTF-8 strings prefixed with a u32
// length, fixed-width byte strings written raw. Booleans are one byte, 0 or 1.

#include <cstdint>
#include <string>
#include <string_view>

#include "dlacb/util/bytes.hpp"

namespace dlacb {

class Encoder {
 public:
  Encoder& u8(std::uint8_t v);
  Encoder& u16(std::uint16_t v);
  Encoder& u32(std::uint32_t v);
  Encoder& u64(std::uint64_t v);
  Encoder& boolean(bool v) { return u8(v ? 1 : 0); }
  Encoder& f64(double v);  // IEEE-754 bits, big-endian
  Encoder& raw(ByteView v);
  Encoder& bytes(ByteView v);
  Encoder& str(std::string_view s);
  template <std::size_t N, class Tag>
  Encoder& fixed(const FixedBytes<N, Tag>& v) {
    return raw(v.view());
  }

  const Bytes& data() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Strict decoder: throws FormatError on truncation, oversize lengths, bad
// booleans, and (via finish) trailing bytes.
class Decoder {
 public:
  explicit Decoder(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  bool boolean();
  double f64();
  Bytes raw(std::size_t n);
  Bytes bytes(std::size_t max_len = kDefaultMaxLen);
  std::string str(std::size_t max_len = kDefaultMaxLen);
  template <class F>
  F fixed() {
    return F::from_span(take(F::size()));
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool empty() const { return remaining() == 0; }
  void finish() const;

  static constexpr std::size_t kDefaultMaxLen = 64u << 20;

 private:
  ByteView take(std::size_t n);
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace dlacb
