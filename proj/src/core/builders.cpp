#include "dlacb/core/builders.hpp"

#include "dlacb/core/encoding.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::core {

SetupTx build_setup_tx(const KeyPair& admin, const PublicKey& user_pk, Timestamp time) {
  SetupTx tx{admin.public_key, user_pk, time, {}};
  tx.admin_sig = crypto::sign(admin.secret_key, signing_bytes(tx));
  return tx;
}

AccReqTx build_access_request_tx(const KeyPair& user, const ReqInfo& req_info, Timestamp time) {
  if (static_cast<std::size_t>(req_info.operation) >= decision::kOperationCount) {
    throw ValidationError("operation index out of range");
  }
  AccReqTx tx{user.public_key, time, req_info, {}};
  tx.user_sig = crypto::sign(user.secret_key, signing_bytes(tx));
  return tx;
}

LinkTx build_link_tx(const KeyPair& storage, const RequestId& request_id, Timestamp issued_at,
                     const Digest& commitment, Bytes ciphertext) {
  LinkTx tx{request_id, issued_at, commitment, std::move(ciphertext), {}};
  tx.storage_sig = crypto::sign(storage.secret_key, signing_bytes(tx));
  return tx;
}

StorageTx build_storage_tx(const KeyPair& storage, const Nonce& nonce, Timestamp time,
                           const PublicKey& user_pk) {
  StorageTx tx{nonce, time, user_pk, {}};
  tx.storage_sig = crypto::sign(storage.secret_key, signing_bytes(tx));
  return tx;
}

bool verify_transaction_signature(const Transaction& tx, const PublicKey& storage_pk) {
  return std::visit(
      [&](const auto& t) -> bool {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, SetupTx>) {
          return crypto::verify(t.admin_pk, signing_bytes(t), t.admin_sig);
        } else if constexpr (std::is_same_v<T, AccReqTx>) {
          return crypto::verify(t.user_pk, signing_bytes(t), t.user_sig);
        } else if constexpr (std::is_same_v<T, LinkTx> || std::is_same_v<T, StorageTx>) {
          return crypto::verify(storage_pk, signing_bytes(t), t.storage_sig);
        } else {
          return t.contract_origin;
        }
      },
      tx);
}

Block seal(Block block, const KeyPair& validator) {
  block.validator_pk = validator.public_key;
  block.validator_sig = crypto::sign(validator.secret_key, signing_bytes(block));
  return block;
}

bool verify_block_signature(const Block& block) {
  return crypto::verify(block.validator_pk, signing_bytes(block), block.validator_sig);
}

RequestId random_request_id(crypto::EntropySource& entropy) {
  RequestId id;
  entropy.fill(id.bytes);
  return id;
}

Digest nonce_commitment(const Nonce& nonce) { return crypto::hash(nonce.view()); }

}  // namespace dlacb::core
