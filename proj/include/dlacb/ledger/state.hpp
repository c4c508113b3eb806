#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dlacb/core/types.hpp"
#include "dlacb/decision/engine.hpp"
#include "dlacb/decision/rules.hpp"

namespace dlacb::ledger {

using core::AccReqTx;
using core::Block;
using core::Digest;
using core::KeyPair;
using core::LinkTx;
using core::Nonce;
using core::Operation;
using core::PublicKey;
using core::ReqInfo;
using core::RequestId;
using core::SetupTx;
using core::Signature;
using core::StorageTx;
using core::Timestamp;
using core::Transaction;
using core::VerifiedTx;

inline constexpr std::size_t kMinValidators = 3;

struct LedgerParams {
  std::uint64_t freshness_window = 120;  // seconds either side of "now"
  std::uint64_t nonce_lifetime = 300;    // seconds from link issuance
  std::uint64_t block_interval = 1;      // seconds per leader slot
  bool operator==(const LedgerParams&) const = default;
};

struct GenesisConfig {
  std::vector<PublicKey> admin_pks;
  std::vector<PublicKey> validators;  // leader schedule order
  PublicKey storage_pk;
  Digest engine_fingerprint;  // SHA-256 of the serialized model
  std::vector<decision::PriorityRule> rules;
  decision::EngineConfig engine;
  Timestamp genesis_time = 0;
  LedgerParams params;
  bool operator==(const GenesisConfig& o) const;
};

Bytes encode(const GenesisConfig& config);
GenesisConfig decode_genesis_config(ByteView data);

enum class LogKind : std::uint8_t {
  requested = 0,
  authenticated = 1,
  decided = 2,
  link_issued = 3,
  redeemed = 4,
  denied = 5,
  expired = 6,
};

enum class Decision : std::uint8_t { none = 0, granted = 1, denied = 2 };

enum class DenyReason : std::uint8_t {
  none = 0,
  unregistered = 1,
  stale = 2,
  bad_signature = 3,
  model = 4,
  rule = 5,
};

std::string to_string(LogKind k);
std::string to_string(Decision d);
std::string to_string(DenyReason r);

struct LogEntry {
  LogKind kind = LogKind::requested;
  PublicKey user_pk;
  std::uint32_t resource_id = 0;
  Operation operation = Operation::op1;
  Decision decision = Decision::none;
  DenyReason reason = DenyReason::none;
  bool overridden = false;  // a priority rule forced the requested operation
  RequestId request_id;
  std::uint64_t block_height = 0;
  Timestamp time = 0;
  bool operator==(const LogEntry&) const = default;
};

std::string to_text(const LogEntry& e);

struct UserRecord {
  PublicKey pk;
  std::uint32_t index = 0;
  Timestamp registered_at = 0;
  bool operator==(const UserRecord&) const = default;
};

enum class NonceStatus : std::uint8_t { issued = 0, redeemed = 1, expired = 2 };

struct NonceRecord {
  RequestId request_id;
  Timestamp issued_at = 0;
  Timestamp expires_at = 0;
  NonceStatus status = NonceStatus::issued;
  bool operator==(const NonceRecord&) const = default;
};

enum class RequestStage : std::uint8_t {
  requested = 0,
  denied = 1,
  granted = 2,
  link_issued = 3,
  redeemed = 4,
  expired = 5,
};

struct RequestRecord {
  PublicKey user_pk;
  ReqInfo req_info;
  Timestamp time = 0;
  std::uint64_t height = 0;
  RequestStage stage = RequestStage::requested;
  DenyReason deny_reason = DenyReason::none;
  decision::AccessList access_list{};
  std::optional<Digest> nonce_commitment;
  bool operator==(const RequestRecord&) const = default;
};

enum class RejectReason : std::uint8_t {
  bad_signature,
  stale_time,
  unauthorized_sender,
  duplicate,
  wrong_leader,
  broken_chain,
  bad_height,
  bad_time,
  duplicate_user,
  replay,
  expired,
  unknown_nonce,
  unknown_request,
  verified_mismatch,
  malformed,
};

std::string to_string(RejectReason r);

struct Rejection {
  RejectReason reason = RejectReason::malformed;
  std::string detail;
};

// The memory M: everything derived by replaying the chain from genesis.
// Mutated only through the ledger operations.
struct LedgerState {
  GenesisConfig config;
  Digest genesis_hash;
  std::vector<std::shared_ptr<const Block>> chain;
  std::map<Digest, UserRecord> users;  // keyed by H(pk)
  std::map<Digest, NonceRecord> nonce_registry;  // keyed by H(nonce)
  std::map<RequestId, RequestRecord> requests;
  std::vector<LogEntry> access_log;
  std::set<Digest> tx_ids;
  // Node-local; not part of the replicated state digest.
  std::vector<Transaction> pending_pool;
  std::shared_ptr<const decision::DecisionEngine> engine;

  std::uint64_t height() const { return chain.back()->height; }
  const Block& tip() const { return *chain.back(); }
  Digest tip_hash() const;
  const UserRecord* find_user(const PublicKey& pk) const;
  const RequestRecord* find_request(const RequestId& id) const;
  std::size_t user_count() const { return users.size(); }
};

bool is_fresh(Timestamp tx_time, Timestamp now, std::uint64_t window);

}  // namespace dlacb::ledger
