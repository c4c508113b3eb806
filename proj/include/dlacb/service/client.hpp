#pragma once

#include <optional>
#include <string>

#include "dlacb/service/api.hpp"

namespace dlacb::service {

struct LinkView {
  storage::LinkGrant grant;
  Timestamp expires_at = 0;
};

struct PollOutcome {
  PollState state = PollState::pending;
  std::string reason;
  std::optional<LinkView> link;
};

// Text form of a log query as typed on the command line or sent over HTTP.
struct LogQuery {
  std::optional<std::string> user;      // public key hex
  std::optional<std::string> resource;
  std::optional<std::string> decision;  // none | granted | denied
  std::optional<std::string> kind;      // requested | authenticated | ...
  std::optional<std::string> from;      // min height
  std::optional<std::string> to;        // max height
};

// Throws UsageError on any malformed field.
ledger::LogFilter parse_log_query(const LogQuery& q);
LogQuery to_query(const ledger::LogFilter& f);

std::optional<ledger::LogKind> parse_log_kind(std::string_view s);
std::optional<ledger::Decision> parse_decision(std::string_view s);
std::optional<ledger::DenyReason> parse_deny_reason(std::string_view s);

// User-side library: builds and signs transactions, decrypts links.
class Client {
 public:
  explicit Client(Service& service, std::shared_ptr<crypto::EntropySource> entropy = nullptr);

  ApiResult<Digest> register_user(const KeyPair& admin, const PublicKey& user);
  ApiResult<RequestId> request_access(const KeyPair& user, std::uint32_t resource_id,
                                      std::string_view operation);
  ApiResult<PollOutcome> poll(const RequestId& id, const KeyPair& user);
  ApiResult<Bytes> redeem(const LinkToken& token, const Nonce& nonce, std::string_view operation);
  ApiResult<std::vector<ledger::LogEntry>> logs(const LogQuery& query);
  ApiResult<std::vector<BlockSummary>> chain(std::uint64_t from, std::uint64_t to);

 private:
  Service& service_;
  std::shared_ptr<crypto::EntropySource> entropy_;
};

}  // namespace dlacb::service
