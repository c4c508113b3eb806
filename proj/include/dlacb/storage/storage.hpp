#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dlacb/core/types.hpp"
#include "dlacb/ledger/contracts.hpp"
#include "dlacb/util/expected.hpp"

namespace dlacb::storage {

using core::Digest;
using core::KeyPair;
using core::LinkToken;
using core::LinkTx;
using core::Nonce;
using core::Operation;
using core::PublicKey;
using core::RequestId;
using core::StorageTx;
using core::Timestamp;

inline constexpr std::uint64_t kDefaultLinkLifetime = 300;

struct ResourceMetadata {
  std::uint32_t id = 0;
  std::string name;
  Digest digest;  // SHA-256 of the payload
  std::uint64_t size = 0;
  bool operator==(const ResourceMetadata&) const = default;
};

struct AccessLink {
  LinkToken token;
  Nonce nonce;
  std::uint32_t resource_id = 0;
  decision::AccessList permitted_ops{};
  PublicKey user_pk;
  RequestId request_id;
  Timestamp issued_at = 0;
  Timestamp expires_at = 0;
  bool redeemed = false;
  bool expired = false;
};

// Plaintext sealed to the user inside T_Link.
struct LinkGrant {
  LinkToken token;
  Nonce nonce;
  Timestamp issued_at = 0;
  std::uint32_t resource_id = 0;
  bool operator==(const LinkGrant&) const = default;
};

Bytes encode(const LinkGrant& g);
LinkGrant decode_link_grant(ByteView data);
// Decrypts the T_Link payload with the user's key; throws DecryptError/FormatError.
LinkGrant open_link(const LinkTx& tx, const KeyPair& user);

struct Denial {
  RequestId request_id;
  PublicKey user_pk;
  std::uint32_t resource_id = 0;
  Operation operation = Operation::op1;
  std::string reason;  // "decision" or "unknown_resource"
};

enum class ResultRejection : std::uint8_t { forged, undecryptable, already_served };
std::string to_string(ResultRejection r);

enum class RedeemError : std::uint8_t {
  unknown_token,
  wrong_nonce,
  expired,
  already_redeemed,
  operation_not_permitted,
};
std::string to_string(RedeemError e);
std::optional<RedeemError> parse_redeem_error(std::string_view name);

struct Redemption {
  Bytes payload;
  StorageTx storage_tx;
};

struct AuditEntry {
  Timestamp time = 0;
  std::string event;
  std::string detail;
};

using ResultOutcome = std::variant<LinkTx, Denial>;

// Single-writer: callers serialize access.
class StorageService {
 public:
  // With a data directory, payloads live in content-addressed files under
  // objects/ and an index file lists the metadata; otherwise in memory.
  StorageService(KeyPair keys, std::vector<PublicKey> validators,
                 std::shared_ptr<crypto::EntropySource> entropy,
                 std::optional<std::filesystem::path> data_dir = std::nullopt,
                 std::uint64_t link_lifetime = kDefaultLinkLifetime);

  const PublicKey& public_key() const { return keys_.public_key; }

  // Throws ValidationError on a duplicate id.
  ResourceMetadata put_resource(std::uint32_t id, std::string name, Bytes payload);
  // Throws NotFoundError.
  ResourceMetadata get_metadata(std::uint32_t id) const;
  std::vector<ResourceMetadata> list_resources() const;

  Expected<ResultOutcome, ResultRejection> handle_request_result(const ledger::ResultEnvelope& env,
                                                                 Timestamp now);
  Expected<Redemption, RedeemError> redeem(const LinkToken& token, const Nonce& nonce,
                                           Operation op, Timestamp now);
  std::size_t expire_links(Timestamp now);

  const AccessLink* find_link(const LinkToken& token) const;
  std::size_t link_count() const { return links_.size(); }
  std::size_t redemption_count() const { return redemptions_; }
  const std::vector<AuditEntry>& audit() const { return audit_; }

 private:
  Bytes load_payload(const ResourceMetadata& meta) const;
  void write_index() const;
  void record(Timestamp t, std::string event, std::string detail);

  KeyPair keys_;
  std::vector<PublicKey> validators_;
  std::shared_ptr<crypto::EntropySource> entropy_;
  std::optional<std::filesystem::path> data_dir_;
  std::uint64_t link_lifetime_;
  std::map<std::uint32_t, ResourceMetadata> resources_;
  std::map<std::uint32_t, Bytes> memory_payloads_;
  std::map<LinkToken, AccessLink> links_;
  std::set<RequestId> served_;
  std::vector<AuditEntry> audit_;
  std::size_t redemptions_ = 0;
};

}  // namespace dlacb::storage
