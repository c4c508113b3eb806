#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dlacb/net/nodes.hpp"

namespace dlacb::net {

enum class Behavior : std::uint8_t { replay_link, tamper_block, unauthorized_request, reuse_nonce };
std::string to_string(Behavior b);
// Throws ConfigError on a name outside the catalogue.
Behavior parse_behavior(std::string_view name);

// A user node that runs one scripted attack. Outcomes are the responses it
// got back, e.g. "redeem:already_redeemed" or "tampered_block_sent".
class AdversaryNode final : public UserNode {
 public:
  AdversaryNode(std::string name, KeyPair keys, std::shared_ptr<crypto::EntropySource> entropy,
                std::uint64_t freshness_window, Behavior behavior, Timestamp start,
                std::uint32_t resource_id, core::Operation op);

  Behavior behavior() const { return behavior_; }
  const std::vector<std::string>& outcomes() const { return outcomes_; }
  bool finished() const { return finished_; }

  void on_tick(NodeContext& ctx) override;
  void on_message(NodeContext& ctx, const std::string& from, const Message& m) override;

 protected:
  void on_redeemed(NodeContext& ctx, TrackedRequest& r) override;
  void on_stray_response(NodeContext& ctx, const RedeemResponse& resp) override;

 private:
  void tamper(NodeContext& ctx);

  Behavior behavior_;
  Timestamp start_;
  std::uint32_t resource_id_;
  core::Operation op_;
  bool started_ = false;
  bool finished_ = false;
  std::optional<storage::LinkGrant> first_grant_;
  std::optional<core::RequestId> second_request_;
  std::optional<core::Block> seen_tip_;
  bool asked_chain_ = false;
  std::uint64_t attack_correlation_ = 0;
  std::optional<RedeemRequest> replay_;  // resent until storage answers
  std::vector<std::string> outcomes_;
};

}  // namespace dlacb::net
