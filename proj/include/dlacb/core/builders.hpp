#pragma once

#include "dlacb/core/types.hpp"

namespace dlacb::core {

SetupTx build_setup_tx(const KeyPair& admin, const PublicKey& user_pk, Timestamp time);

// Throws ValidationError on an operation index outside [0,4).
AccReqTx build_access_request_tx(const KeyPair& user, const ReqInfo& req_info, Timestamp time);

LinkTx build_link_tx(const KeyPair& storage, const RequestId& request_id, Timestamp issued_at,
                     const Digest& nonce_commitment, Bytes ciphertext);

StorageTx build_storage_tx(const KeyPair& storage, const Nonce& nonce, Timestamp time,
                           const PublicKey& user_pk);

// Signer for Link and Storage records is the storage key; Setup and AccReq
// carry their signer. Verified records are valid only when they came out of
// the local authentication contract.
bool verify_transaction_signature(const Transaction& tx, const PublicKey& storage_pk);

Block seal(Block block, const KeyPair& validator);
bool verify_block_signature(const Block& block);

RequestId random_request_id(crypto::EntropySource& entropy);
Digest nonce_commitment(const Nonce& nonce);

}  // namespace dlacb::core
