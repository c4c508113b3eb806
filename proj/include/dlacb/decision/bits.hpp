#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dlacb::decision {

// Fixed-width bit string, most significant bit first.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::vector<std::uint8_t> bits);  // each entry 0 or 1

  std::size_t width() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::uint64_t to_uint() const;  // throws EncodingError if width > 64
  std::string to_string() const;

  bool operator==(const BitVector&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Big-endian fixed-width binary expansion; throws EncodingError when
// value >= 2^width.
BitVector binary_repr(std::uint64_t value, unsigned width);

}  // namespace dlacb::decision
