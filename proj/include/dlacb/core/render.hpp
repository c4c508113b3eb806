#pragma once

#include <string>

#include "dlacb/core/types.hpp"

namespace dlacb::core {

// Human-readable single-line renderings for logs and CLI output.
std::string short_hex(ByteView bytes, std::size_t n = 8);
std::string to_text(const Transaction& tx);
std::string to_text(const Block& block);

}  // namespace dlacb::core
