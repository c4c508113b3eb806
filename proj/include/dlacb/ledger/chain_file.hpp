#pragma once

#include <filesystem>
#include <vector>

#include "dlacb/core/types.hpp"

namespace dlacb::ledger {

// Append-only block log: each record is a u32 big-endian length followed by
// the canonical block encoding.
void append_block(const std::filesystem::path& path, const core::Block& block);
void write_chain(const std::filesystem::path& path, const std::vector<core::Block>& blocks);
// Throws FormatError on a truncated or undecodable record.
std::vector<core::Block> read_chain(const std::filesystem::path& path);

}  // namespace dlacb::ledger
