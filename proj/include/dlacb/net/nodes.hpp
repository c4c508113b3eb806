#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dlacb/decision/model.hpp"
#include "dlacb/ledger/ledger.hpp"
#include "dlacb/net/messages.hpp"
#include "dlacb/storage/storage.hpp"

namespace dlacb::net {

using core::Digest;
using core::KeyPair;
using core::PublicKey;
using core::Timestamp;

// Status of a request as recorded on the chain; unknown if not yet seen.
PollResponse poll_request(const ledger::LedgerState& state, const core::RequestId& id);

enum class Role : std::uint8_t { validator, storage, user };
std::string to_string(Role r);

// What a node sees of the network. Implemented by the simulator and by the
// live socket runner.
class NodeContext {
 public:
  virtual ~NodeContext() = default;
  virtual Timestamp now() const = 0;
  virtual void send(const std::string& to, const Message& m) = 0;
  virtual std::vector<std::string> peers(Role role) const = 0;
  virtual void trace(std::string_view event, std::string_view ref) = 0;
  virtual bool retransmit() const = 0;
};

class Node {
 public:
  Node(std::string name, KeyPair keys) : name_(std::move(name)), keys_(std::move(keys)) {}
  virtual ~Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  const std::string& name() const { return name_; }
  const KeyPair& keys() const { return keys_; }
  virtual Role role() const = 0;

  virtual void on_message(NodeContext& ctx, const std::string& from, const Message& m) = 0;
  virtual void on_tick(NodeContext& ctx) = 0;

  // Gossip a transaction to every validator; re-sent each tick with
  // retransmission on until seen in a block or no longer fresh.
  void submit(NodeContext& ctx, const core::Transaction& tx);
  std::size_t unconfirmed_count() const { return unconfirmed_.size(); }
  void trust_validators(std::vector<PublicKey> v) { validators_ = std::move(v); }

 protected:
  void retransmit_unconfirmed(NodeContext& ctx, std::uint64_t freshness_window);
  void confirm_block(const core::Block& block);

  std::vector<PublicKey> validators_;

 private:
  struct Outgoing {
    core::Transaction tx;
    Timestamp first_sent = 0;
  };
  std::string name_;
  KeyPair keys_;
  std::map<Digest, Outgoing> unconfirmed_;
};

class ValidatorNode final : public Node {
 public:
  ValidatorNode(std::string name, KeyPair keys, ledger::LedgerState genesis_state,
                std::shared_ptr<const decision::DecisionModel> model,
                std::shared_ptr<crypto::EntropySource> entropy);

  Role role() const override { return Role::validator; }
  void on_message(NodeContext& ctx, const std::string& from, const Message& m) override;
  void on_tick(NodeContext& ctx) override;

  const ledger::LedgerState& state() const { return state_; }
  const std::vector<core::Transaction>& pool() const { return state_.pending_pool; }
  PollResponse poll(const core::RequestId& id) const;
  std::uint64_t blocks_sealed() const { return sealed_; }
  std::size_t undelivered_count() const { return undelivered_.size(); }

  // Installs a chain if it replays cleanly and wins fork choice.
  bool consider_chain(NodeContext& ctx, const ledger::Chain& chain);

 private:
  void accept_tx(NodeContext& ctx, const core::Transaction& tx);
  void on_block(NodeContext& ctx, const std::string& from, const core::Block& block);
  void adopt(ledger::LedgerState next);
  void prune_pool(Timestamp now);
  void seal(NodeContext& ctx, std::uint64_t height);
  void deliver_results(NodeContext& ctx);

  ledger::LedgerState state_;
  std::shared_ptr<const decision::DecisionModel> model_;
  std::shared_ptr<crypto::EntropySource> entropy_;
  // Envelopes for results this node produced, until storage acknowledges.
  std::map<core::RequestId, ledger::ResultEnvelope> undelivered_;
  std::uint64_t sealed_ = 0;
};

class StorageNode final : public Node {
 public:
  StorageNode(std::string name, std::shared_ptr<storage::StorageService> service,
              KeyPair keys, std::uint64_t freshness_window);

  Role role() const override { return Role::storage; }
  void on_message(NodeContext& ctx, const std::string& from, const Message& m) override;
  void on_tick(NodeContext& ctx) override;

  storage::StorageService& service() { return *service_; }
  const storage::StorageService& service() const { return *service_; }

 private:
  std::shared_ptr<storage::StorageService> service_;
  std::uint64_t freshness_window_;
  // Responses cached per (sender, correlation) so a retransmitted request
  // gets the original answer instead of a second redemption attempt.
  std::map<std::pair<std::string, std::uint64_t>, RedeemResponse> answered_;
};

enum class RequestStatus : std::uint8_t { submitted, pending, denied, link, redeemed, redeem_failed };
std::string to_string(RequestStatus s);

struct TrackedRequest {
  core::RequestId id;
  std::uint32_t resource_id = 0;
  core::Operation operation = core::Operation::op1;
  RequestStatus status = RequestStatus::submitted;
  std::string deny_reason;
  std::optional<storage::LinkGrant> grant;
  std::optional<storage::RedeemError> redeem_error;
  Bytes payload;
  bool auto_redeem = true;
  std::uint64_t correlation = 0;
  core::Nonce presented_nonce;  // nonce sent with the redeem request
  Timestamp last_poll = 0;
  bool polled = false;
};

class UserNode : public Node {
 public:
  UserNode(std::string name, KeyPair keys, std::shared_ptr<crypto::EntropySource> entropy,
           std::uint64_t freshness_window);

  Role role() const override { return Role::user; }
  void on_message(NodeContext& ctx, const std::string& from, const Message& m) override;
  void on_tick(NodeContext& ctx) override;

  core::RequestId request_access(NodeContext& ctx, std::uint32_t resource_id,
                                 core::Operation op, bool auto_redeem = true);
  void redeem(NodeContext& ctx, const core::RequestId& id);
  const TrackedRequest* find(const core::RequestId& id) const;
  const std::vector<TrackedRequest>& requests() const { return requests_; }
  // Last block seen from any validator.
  const std::optional<core::Block>& last_block() const { return last_block_; }

 protected:
  virtual void on_redeemed(NodeContext&, TrackedRequest&) {}
  virtual void on_stray_response(NodeContext&, const RedeemResponse&) {}
  void send_redeem(NodeContext& ctx, TrackedRequest& r, std::uint64_t correlation,
                   std::optional<core::Nonce> nonce = std::nullopt);
  std::uint64_t next_correlation() { return ++correlation_; }
  TrackedRequest* find_mut(const core::RequestId& id);

  std::shared_ptr<crypto::EntropySource> entropy_;
  std::uint64_t freshness_window_;

 private:
  std::vector<TrackedRequest> requests_;
  std::optional<core::Block> last_block_;
  std::uint64_t correlation_ = 0;
  std::size_t poll_cursor_ = 0;
};

}  // namespace dlacb::net
