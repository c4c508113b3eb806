#include "dlacb/ledger/chain_file.hpp"

#include <fstream>
#include <iterator>

#include "dlacb/core/encoding.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::ledger {
namespace {

void write_record(std::ofstream& out, const core::Block& block) {
  auto bytes = core::encode(block);
  auto n = static_cast<std::uint32_t>(bytes.size());
  const char len[4] = {static_cast<char>(n >> 24), static_cast<char>(n >> 16),
                       static_cast<char>(n >> 8), static_cast<char>(n)};
  out.write(len, 4);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

void append_block(const std::filesystem::path& path, const core::Block& block) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot open chain file " + path.string());
  write_record(out, block);
  if (!out) throw Error("write failed on chain file " + path.string());
}

void write_chain(const std::filesystem::path& path, const std::vector<core::Block>& blocks) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open chain file " + path.string());
  for (const auto& b : blocks) write_record(out, b);
  if (!out) throw Error("write failed on chain file " + path.string());
}

std::vector<core::Block> read_chain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open chain file " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<core::Block> blocks;
  std::size_t pos = 0;
  while (pos < data.size()) {
    if (data.size() - pos < 4) throw FormatError("truncated chain record header");
    std::uint32_t n = (std::uint32_t{data[pos]} << 24) | (std::uint32_t{data[pos + 1]} << 16) |
                      (std::uint32_t{data[pos + 2]} << 8) | data[pos + 3];
    pos += 4;
    if (data.size() - pos < n) throw FormatError("truncated chain record");
    blocks.push_back(core::decode_block(ByteView(data.data() + pos, n)));
    pos += n;
  }
  return blocks;
}

}  // namespace dlacb::ledger
