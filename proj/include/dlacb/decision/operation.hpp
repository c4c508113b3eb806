#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dlacb::decision {

inline constexpr std::size_t kOperationCount = 4;

// The four abstract operations a model scores per (user, resource) pair.
enum class Operation : std::uint8_t { op1 = 0, op2 = 1, op3 = 2, op4 = 3 };

using Scores = std::array<double, kOperationCount>;
using AccessList = std::array<bool, kOperationCount>;

inline std::size_t index_of(Operation op) { return static_cast<std::size_t>(op); }

inline std::optional<Operation> operation_from_index(std::uint64_t i) {
  if (i >= kOperationCount) return std::nullopt;
  return static_cast<Operation>(i);
}

inline std::string operation_name(Operation op) { return "op" + std::to_string(index_of(op) + 1); }

// Accepts "op1".."op4".
inline std::optional<Operation> parse_operation(std::string_view name) {
  if (name.size() != 3 || name.substr(0, 2) != "op") return std::nullopt;
  char c = name[2];
  if (c < '1' || c > '4') return std::nullopt;
  return static_cast<Operation>(c - '1');
}

}  // namespace dlacb::decision
