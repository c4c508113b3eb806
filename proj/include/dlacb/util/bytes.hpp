#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dlacb {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);  // throws FormatError

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Fixed-width byte string with a tag type so keys, digests, nonces and
// signatures cannot be mixed up.
template <std::size_t N, class Tag>
struct FixedBytes {
  static constexpr std::size_t size() { return N; }
  std::array<std::uint8_t, N> bytes{};

  static FixedBytes from_span(ByteView v);  // throws FormatError on wrong size
  static FixedBytes from_hex(std::string_view hex) { return from_span(dlacb::from_hex(hex)); }

  ByteView view() const { return {bytes.data(), N}; }
  std::string hex() const { return to_hex(view()); }
  bool is_zero() const {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
  }

  auto operator<=>(const FixedBytes&) const = default;
  bool operator==(const FixedBytes&) const = default;
};

}  // namespace dlacb

#include "dlacb/util/error.hpp"

namespace dlacb {

template <std::size_t N, class Tag>
FixedBytes<N, Tag> FixedBytes<N, Tag>::from_span(ByteView v) {
  if (v.size() != N) {
    throw FormatError("expected " + std::to_string(N) + " bytes, got " + std::to_string(v.size()));
  }
  FixedBytes out;
  std::copy(v.begin(), v.end(), out.bytes.begin());
  return out;
}

}  // namespace dlacb
