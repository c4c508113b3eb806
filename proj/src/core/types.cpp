#include "dlacb/core/types.hpp"

namespace dlacb::core {

TxKind kind_of(const Transaction& tx) {
  return static_cast<TxKind>(tx.index() + 1);
}

std::string kind_name(TxKind k) {
  switch (k) {
    case TxKind::setup: return "T_Setup";
    case TxKind::acc_req: return "T_AccReq";
    case TxKind::link: return "T_Link";
    case TxKind::storage: return "T_Storage";
    case TxKind::verified: return "T_Verified";
  }
  return "T_Unknown";
}

Timestamp time_of(const Transaction& tx) {
  return std::visit(
      [](const auto& t) -> Timestamp {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, LinkTx>) {
          return t.issued_at;
        } else {
          return t.time;
        }
      },
      tx);
}

}  // namespace dlacb::core
