#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dlacb/crypto/crypto.hpp"
#include "dlacb/decision/bits.hpp"
#include "dlacb/decision/operation.hpp"

namespace dlacb::core {

using crypto::Digest;
using crypto::KeyPair;
using crypto::PublicKey;
using crypto::SecretKey;
using crypto::Signature;
using decision::BitVector;
using decision::Operation;

using Timestamp = std::uint64_t;  // unix seconds

struct RequestIdTag {};
struct NonceTag {};
struct LinkTokenTag {};
using RequestId = FixedBytes<16, RequestIdTag>;
using Nonce = FixedBytes<16, NonceTag>;
using LinkToken = FixedBytes<16, LinkTokenTag>;

struct ReqInfo {
  std::uint32_t resource_id = 0;
  Operation operation = Operation::op1;
  RequestId request_id;
  bool operator==(const ReqInfo&) const = default;
};

// Registration of a user key by an administrator.
struct SetupTx {
  PublicKey admin_pk;
  PublicKey user_pk;
  Timestamp time = 0;
  Signature admin_sig;
  bool operator==(const SetupTx&) const = default;
};

// Access request signed by the requesting user.
struct AccReqTx {
  PublicKey user_pk;
  Timestamp time = 0;
  ReqInfo req_info;
  Signature user_sig;
  bool operator==(const AccReqTx&) const = default;
};

// Access link issued by storage. The ciphertext is addressed to the
// requesting user and carries (link, nonce, time). request_id, issued_at and
// the nonce commitment H(nonce) travel in clear so the chain can route the
// link and later match the redemption without decrypting anything.
struct LinkTx {
  RequestId request_id;
  Timestamp issued_at = 0;
  Digest nonce_commitment;
  Bytes ciphertext;
  Signature storage_sig;
  bool operator==(const LinkTx&) const = default;
};

// Redemption record emitted by storage.
struct StorageTx {
  Nonce nonce;
  Timestamp time = 0;
  PublicKey user_pk;
  Signature storage_sig;
  bool operator==(const StorageTx&) const = default;
};

// Output of the authentication contract. Never accepted from the network;
// validators re-derive it while applying the block.
struct VerifiedTx {
  Timestamp time = 0;
  BitVector user_bits;
  BitVector req_bits;
  RequestId request_id;
  // Set only by the local contract; not part of the encoding.
  bool contract_origin = false;

  bool operator==(const VerifiedTx& o) const {
    return time == o.time && user_bits == o.user_bits && req_bits == o.req_bits &&
           request_id == o.request_id;
  }
};

using Transaction = std::variant<SetupTx, AccReqTx, LinkTx, StorageTx, VerifiedTx>;

enum class TxKind : std::uint8_t { setup = 1, acc_req = 2, link = 3, storage = 4, verified = 5 };

TxKind kind_of(const Transaction& tx);
std::string kind_name(TxKind k);
Timestamp time_of(const Transaction& tx);

struct Block {
  std::uint64_t height = 0;
  Digest prev_hash;
  Timestamp time = 0;
  std::vector<Transaction> transactions;
  PublicKey validator_pk;
  Signature validator_sig;
  // Encoded genesis configuration; empty on every block except height 0.
  Bytes genesis_payload;

  bool operator==(const Block&) const = default;
};

}  // namespace dlacb::core
