#include "dlacb/decision/bits.hpp"

#include "dlacb/util/error.hpp"

namespace dlacb::decision {

BitVector::BitVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) {
    if (b > 1) throw EncodingError("bit vector entries must be 0 or 1");
  }
}

std::uint64_t BitVector::to_uint() const {
  if (bits_.size() > 64) throw EncodingError("bit vector wider than 64 bits");
  std::uint64_t v = 0;
  for (auto b : bits_) v = (v << 1) | b;
  return v;
}

std::string BitVector::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

BitVector binary_repr(std::uint64_t value, unsigned width) {
  if (width > 64) throw EncodingError("width exceeds 64 bits");
  if (width < 64 && (value >> width) != 0) {
    throw EncodingError("value " + std::to_string(value) + " does not fit in " +
                        std::to_string(width) + " bits");
  }
  std::vector<std::uint8_t> bits(width);
  for (unsigned i = 0; i < width; ++i) {
    bits[width - 1 - i] = static_cast<std::uint8_t>((value >> i) & 1u);
  }
  return BitVector(std::move(bits));
}

}  // namespace dlacb::decision
