#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>

namespace dlacb::crypto {

class EntropyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Randomness injection point for key generation, encryption and token minting.
class EntropySource {
 public:
  virtual ~EntropySource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
};

// Operating-system randomness.
class SystemEntropy final : public EntropySource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// Reproducible stream: each fill() draws from a ChaCha20 keystream keyed by
// SHA-256(seed || call counter). Used by the simulator and tests.
class SeededEntropy final : public EntropySource {
 public:
  explicit SeededEntropy(std::uint64_t seed);
  explicit SeededEntropy(std::span<const std::uint8_t> seed);
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::array<std::uint8_t, 32> seed_{};
  std::uint64_t counter_ = 0;
};

std::shared_ptr<EntropySource> system_entropy();

}  // namespace dlacb::crypto
