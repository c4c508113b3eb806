#include "dlacb/core/render.hpp"

#include <sstream>

#include "dlacb/core/encoding.hpp"

namespace dlacb::core {

std::string short_hex(ByteView bytes, std::size_t n) {
  return to_hex(bytes.subspan(0, std::min(n, bytes.size())));
}

std::string to_text(const Transaction& tx) {
  std::ostringstream out;
  out << kind_name(kind_of(tx)) << " id=" << short_hex(tx_id(tx).view());
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, SetupTx>) {
          out << " admin=" << short_hex(t.admin_pk.view()) << " user=" << short_hex(t.user_pk.view())
              << " time=" << t.time;
        } else if constexpr (std::is_same_v<T, AccReqTx>) {
          out << " user=" << short_hex(t.user_pk.view()) << " time=" << t.time
              << " resource=" << t.req_info.resource_id
              << " op=" << decision::operation_name(t.req_info.operation)
              << " request=" << t.req_info.request_id.hex();
        } else if constexpr (std::is_same_v<T, LinkTx>) {
          out << " request=" << t.request_id.hex() << " issued_at=" << t.issued_at
              << " nonce_commitment=" << short_hex(t.nonce_commitment.view())
              << " ciphertext_len=" << t.ciphertext.size();
        } else if constexpr (std::is_same_v<T, StorageTx>) {
          out << " nonce=" << t.nonce.hex() << " time=" << t.time
              << " user=" << short_hex(t.user_pk.view());
        } else {
          out << " time=" << t.time << " user_bits=" << t.user_bits.to_string()
              << " req_bits=" << t.req_bits.to_string() << " request=" << t.request_id.hex();
        }
      },
      tx);
  return out.str();
}

std::string to_text(const Block& block) {
  std::ostringstream out;
  out << "block height=" << block.height << " hash=" << short_hex(block_hash(block).view())
      << " prev=" << short_hex(block.prev_hash.view()) << " time=" << block.time
      << " leader=" << short_hex(block.validator_pk.view()) << " txs=" << block.transactions.size();
  return out.str();
}

}  // namespace dlacb::core
