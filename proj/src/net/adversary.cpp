#include "dlacb/net/adversary.hpp"

#include "dlacb/core/builders.hpp"
#include "dlacb/core/encoding.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::net {

std::string to_string(Behavior b) {
  switch (b) {
    case Behavior::replay_link: return "replay_link";
    case Behavior::tamper_block: return "tamper_block";
    case Behavior::unauthorized_request: return "unauthorized_request";
    case Behavior::reuse_nonce: return "reuse_nonce";
  }
  return "?";
}

Behavior parse_behavior(std::string_view name) {
  for (auto b : {Behavior::replay_link, Behavior::tamper_block, Behavior::unauthorized_request,
                 Behavior::reuse_nonce}) {
    if (to_string(b) == name) return b;
  }
  throw ConfigError("unknown adversary behavior '" + std::string(name) + "'");
}

AdversaryNode::AdversaryNode(std::string name, KeyPair keys,
                             std::shared_ptr<crypto::EntropySource> entropy,
                             std::uint64_t freshness_window, Behavior behavior, Timestamp start,
                             std::uint32_t resource_id, core::Operation op)
    : UserNode(std::move(name), std::move(keys), std::move(entropy), freshness_window),
      behavior_(behavior),
      start_(start),
      resource_id_(resource_id),
      op_(op) {}

void AdversaryNode::on_tick(NodeContext& ctx) {
  UserNode::on_tick(ctx);
  if (finished_ || ctx.now() < start_) return;
  if (behavior_ == Behavior::tamper_block) {
    if (last_block()) seen_tip_ = last_block();
    if (seen_tip_) {
      tamper(ctx);
    } else if (!asked_chain_) {
      asked_chain_ = true;
      for (const auto& v : ctx.peers(Role::validator)) ctx.send(v, SyncRequest{0});
    }
    return;
  }
  if (!started_) {
    started_ = true;
    request_access(ctx, resource_id_, op_);
  }
  if (replay_ && ctx.retransmit()) {
    for (const auto& s : ctx.peers(Role::storage)) ctx.send(s, *replay_);
  }
  if (behavior_ == Behavior::unauthorized_request) {
    const auto& r = requests().front();
    if (r.status == RequestStatus::denied) {
      outcomes_.push_back("denied:" + r.deny_reason);
      finished_ = true;
    } else if (r.status == RequestStatus::link) {
      outcomes_.push_back("link_granted");
      finished_ = true;
    }
  }
}

void AdversaryNode::on_message(NodeContext& ctx, const std::string& from, const Message& m) {
  UserNode::on_message(ctx, from, m);
  if (auto* s = std::get_if<SyncResponse>(&m); s && !s->blocks.empty()) {
    if (!seen_tip_ || s->blocks.back().height > seen_tip_->height) seen_tip_ = s->blocks.back();
    asked_chain_ = false;
  }
  if (behavior_ != Behavior::reuse_nonce || !second_request_ || finished_) return;
  auto* r = find_mut(*second_request_);
  if (!r || r->status != RequestStatus::link || !r->grant || r->correlation != 0) return;
  // Second link in hand: present its token with the nonce of the first link.
  attack_correlation_ = next_correlation();
  send_redeem(ctx, *r, attack_correlation_, first_grant_->nonce);
  ctx.trace("attack:reuse_nonce", r->id.hex().substr(0, 12));
}

void AdversaryNode::on_redeemed(NodeContext& ctx, TrackedRequest& r) {
  if (finished_) return;
  if (!first_grant_) {
    if (r.status != RequestStatus::redeemed) {
      outcomes_.push_back("first_redeem_failed");
      finished_ = true;
      return;
    }
    first_grant_ = r.grant;
    if (behavior_ == Behavior::replay_link) {
      attack_correlation_ = next_correlation();
      replay_ = RedeemRequest{attack_correlation_, r.grant->token, r.grant->nonce, r.operation};
      for (const auto& s : ctx.peers(Role::storage)) ctx.send(s, *replay_);
      ctx.trace("attack:replay_link", r.id.hex().substr(0, 12));
    } else if (behavior_ == Behavior::reuse_nonce) {
      second_request_ = request_access(ctx, resource_id_, op_, false);
    }
    return;
  }
  if (r.correlation != attack_correlation_) return;
  outcomes_.push_back(r.redeem_error ? "redeem:" + storage::to_string(*r.redeem_error) : "redeem:ok");
  finished_ = true;
}

void AdversaryNode::on_stray_response(NodeContext&, const RedeemResponse& resp) {
  if (finished_ || resp.correlation != attack_correlation_) return;
  outcomes_.push_back(resp.error ? "redeem:" + storage::to_string(*resp.error) : "redeem:ok");
  finished_ = true;
}

void AdversaryNode::tamper(NodeContext& ctx) {
  const auto& seen = *seen_tip_;
  // Altered contents under the original signature.
  auto altered = seen;
  altered.time += 1;
  // A fresh block on the real tip, signed with a key the network never trusted.
  core::Block forged;
  forged.height = seen.height + 1;
  forged.prev_hash = core::block_hash(seen);
  forged.time = seen.time + 1;
  forged = core::seal(forged, keys());
  for (const auto& v : ctx.peers(Role::validator)) {
    ctx.send(v, BlockAnnounce{altered});
    ctx.send(v, BlockAnnounce{forged});
  }
  ctx.trace("attack:tamper_block", core::block_hash(altered).hex().substr(0, 12));
  outcomes_.push_back("tampered_block_sent");
  finished_ = true;
}

}  // namespace dlacb::net
