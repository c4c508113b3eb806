#include "dlacb/net/nodes.hpp"

#include <algorithm>
#include <set>

#include "dlacb/core/builders.hpp"
#include "dlacb/core/encoding.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::net {
namespace {

template <class F>
std::string short_ref(const F& v) {
  return v.hex().substr(0, 12);
}

bool from_validator(const core::Block& block, std::span<const PublicKey> validators) {
  return std::find(validators.begin(), validators.end(), block.validator_pk) != validators.end() &&
         core::verify_block_signature(block);
}

}  // namespace

std::string to_string(Role r) {
  switch (r) {
    case Role::validator: return "validator";
    case Role::storage: return "storage";
    case Role::user: return "user";
  }
  return "?";
}

std::string to_string(RequestStatus s) {
  switch (s) {
    case RequestStatus::submitted: return "submitted";
    case RequestStatus::pending: return "pending";
    case RequestStatus::denied: return "denied";
    case RequestStatus::link: return "link";
    case RequestStatus::redeemed: return "redeemed";
    case RequestStatus::redeem_failed: return "redeem_failed";
  }
  return "?";
}

// ---- Node ----

void Node::submit(NodeContext& ctx, const core::Transaction& tx) {
  auto id = core::tx_id(tx);
  unconfirmed_[id] = Outgoing{tx, ctx.now()};
  for (const auto& v : ctx.peers(Role::validator)) ctx.send(v, TxGossip{tx});
  ctx.trace("submit", core::kind_name(core::kind_of(tx)) + ":" + short_ref(id));
}

void Node::retransmit_unconfirmed(NodeContext& ctx, std::uint64_t freshness_window) {
  const auto now = ctx.now();
  for (auto it = unconfirmed_.begin(); it != unconfirmed_.end();) {
    if (!ledger::is_fresh(core::time_of(it->second.tx), now, freshness_window)) {
      ctx.trace("gave_up", short_ref(it->first));
      it = unconfirmed_.erase(it);
      continue;
    }
    if (ctx.retransmit() && now > it->second.first_sent) {
      for (const auto& v : ctx.peers(Role::validator)) ctx.send(v, TxGossip{it->second.tx});
    }
    ++it;
  }
}

void Node::confirm_block(const core::Block& block) {
  for (const auto& tx : block.transactions) unconfirmed_.erase(core::tx_id(tx));
}

// ---- ValidatorNode ----

ValidatorNode::ValidatorNode(std::string name, KeyPair keys, ledger::LedgerState genesis_state,
                             std::shared_ptr<const decision::DecisionModel> model,
                             std::shared_ptr<crypto::EntropySource> entropy)
    : Node(std::move(name), std::move(keys)),
      state_(std::move(genesis_state)),
      model_(std::move(model)),
      entropy_(std::move(entropy)) {}

void ValidatorNode::on_message(NodeContext& ctx, const std::string& from, const Message& m) {
  if (auto* g = std::get_if<TxGossip>(&m)) {
    accept_tx(ctx, g->tx);
  } else if (auto* b = std::get_if<BlockAnnounce>(&m)) {
    on_block(ctx, from, b->block);
  } else if (std::holds_alternative<SyncRequest>(m)) {
    ctx.send(from, SyncResponse{ledger::chain_of(state_)});
  } else if (auto* s = std::get_if<SyncResponse>(&m)) {
    consider_chain(ctx, s->blocks);
  } else if (auto* a = std::get_if<ResultAck>(&m)) {
    std::erase_if(undelivered_, [&](const auto& kv) {
      return crypto::hash(kv.second.ciphertext) == a->envelope_digest;
    });
  } else if (auto* p = std::get_if<PollRequest>(&m)) {
    ctx.send(from, poll(p->request_id));
  }
}

void ValidatorNode::accept_tx(NodeContext& ctx, const core::Transaction& tx) {
  auto id = core::tx_id(tx);
  if (state_.tx_ids.count(id)) return;
  for (const auto& p : state_.pending_pool) {
    if (core::tx_id(p) == id) return;
  }
  auto ok = ledger::validate_transaction(state_, tx, ctx.now());
  if (!ok) {
    ctx.trace("tx_rejected:" + ledger::to_string(ok.error().reason), short_ref(id));
    return;
  }
  state_.pending_pool.push_back(tx);
  ctx.trace("tx_accepted", short_ref(id));
}

void ValidatorNode::on_block(NodeContext& ctx, const std::string& from, const core::Block& block) {
  auto hash = core::block_hash(block);
  for (const auto& b : state_.chain) {
    if (b->height == block.height && core::block_hash(*b) == hash) return;
  }
  if (block.prev_hash == state_.tip_hash()) {
    auto applied = ledger::apply_block(state_, block);
    if (!applied) {
      ctx.trace("block_rejected:" + ledger::to_string(applied.error().reason), short_ref(hash));
      return;
    }
    adopt(std::move(applied->state));
    ctx.trace("block_accepted", short_ref(hash));
    return;
  }
  const auto& validators = state_.config.validators;
  if (!from_validator(block, validators) ||
      block.validator_pk != ledger::expected_leader(block.height, validators)) {
    ctx.trace("block_rejected:unverifiable", short_ref(hash));
    return;
  }
  // Signed by the right leader but not on our tip: ask the sender for its chain.
  ctx.send(from, SyncRequest{state_.chain.size()});
}

bool ValidatorNode::consider_chain(NodeContext& ctx, const ledger::Chain& chain) {
  if (chain.empty() || core::block_hash(chain.front()) != state_.genesis_hash) return false;
  const auto tip = core::block_hash(chain.back());
  const auto mine = state_.tip_hash();
  const auto my_len = state_.chain.size();
  if (tip == mine) return false;
  bool better = chain.size() > my_len || (chain.size() == my_len && tip < mine);
  if (!better) return false;

  Expected<ledger::LedgerState, ledger::Rejection> next = unexpected(ledger::Rejection{});
  if (chain.size() > my_len && core::block_hash(chain[my_len - 1]) == mine) {
    ledger::LedgerState s = state_;
    for (std::size_t i = my_len; i < chain.size(); ++i) {
      auto applied = ledger::apply_block(s, chain[i]);
      if (!applied) {
        next = unexpected(applied.error());
        break;
      }
      s = std::move(applied->state);
      if (i + 1 == chain.size()) next = std::move(s);
    }
  } else {
    next = ledger::replay_chain(chain, model_);
  }
  if (!next) {
    ctx.trace("sync_rejected:" + ledger::to_string(next.error().reason), short_ref(tip));
    return false;
  }
  adopt(std::move(next.value()));
  ctx.trace("sync_adopted", short_ref(tip));
  return true;
}

void ValidatorNode::adopt(ledger::LedgerState next) {
  // User transactions from blocks the new chain orphans go back in the pool;
  // their origins already saw them sealed and stopped gossiping.
  std::set<Digest> kept;
  for (const auto& b : next.chain) kept.insert(core::block_hash(*b));
  std::vector<core::Transaction> pool;
  std::set<Digest> pooled;
  auto offer = [&](const core::Transaction& tx) {
    auto id = core::tx_id(tx);
    if (next.tx_ids.count(id) || !pooled.insert(id).second) return;
    pool.push_back(tx);
  };
  for (const auto& b : state_.chain) {
    if (kept.count(core::block_hash(*b))) continue;
    for (const auto& tx : b->transactions) {
      if (!std::holds_alternative<core::VerifiedTx>(tx)) offer(tx);
    }
  }
  for (const auto& tx : state_.pending_pool) offer(tx);
  next.pending_pool = std::move(pool);
  state_ = std::move(next);
}

void ValidatorNode::prune_pool(Timestamp now) {
  auto window = state_.config.params.freshness_window;
  auto& pool = state_.pending_pool;
  pool.erase(std::remove_if(pool.begin(), pool.end(),
                            [&](const core::Transaction& tx) {
                              return !ledger::is_fresh(core::time_of(tx), now, window);
                            }),
             pool.end());
}

void ValidatorNode::on_tick(NodeContext& ctx) {
  const auto now = ctx.now();
  prune_pool(now);
  const auto& cfg = state_.config;
  if (now > cfg.genesis_time) {
    auto offset = now - cfg.genesis_time;
    auto interval = cfg.params.block_interval;
    if (offset % interval == 0) {
      auto h = offset / interval;
      if (h > state_.height() && !state_.pending_pool.empty() &&
          ledger::expected_leader(h, cfg.validators) == keys().public_key) {
        seal(ctx, h);
      }
    }
  }
  if (ctx.retransmit()) {
    if (state_.chain.size() > 1) {
      for (const auto& v : ctx.peers(Role::validator)) {
        if (v != name()) ctx.send(v, SyncResponse{ledger::chain_of(state_)});
      }
    }
    deliver_results(ctx);
  }
}

void ValidatorNode::seal(NodeContext& ctx, std::uint64_t height) {
  auto out = ledger::build_block(state_, state_.pending_pool, keys(), height, ctx.now());
  for (const auto& [tx, why] : out.dropped) {
    auto id = core::tx_id(tx);
    ctx.trace("tx_dropped:" + ledger::to_string(why.reason), short_ref(id));
    auto& pool = state_.pending_pool;
    pool.erase(std::remove_if(pool.begin(), pool.end(),
                              [&](const core::Transaction& p) { return core::tx_id(p) == id; }),
               pool.end());
  }
  if (out.block.transactions.empty()) return;
  auto applied = ledger::apply_block(state_, out.block);
  if (!applied) {
    ctx.trace("seal_failed:" + ledger::to_string(applied.error().reason), "-");
    return;
  }
  adopt(std::move(applied->state));
  ++sealed_;
  ctx.trace("sealed", short_ref(state_.tip_hash()));
  for (auto role : {Role::validator, Role::storage, Role::user}) {
    for (const auto& peer : ctx.peers(role)) {
      if (peer != name()) ctx.send(peer, BlockAnnounce{out.block});
    }
  }
  for (const auto& r : applied->results) {
    undelivered_[r.request_id] =
        ledger::encrypt_request_result(r, state_.config.storage_pk, keys(), *entropy_);
  }
  if (!applied->results.empty()) {
    auto storage = ctx.peers(Role::storage);
    for (const auto& r : applied->results) {
      for (const auto& s : storage) ctx.send(s, ResultDelivery{undelivered_[r.request_id]});
    }
  }
}

void ValidatorNode::deliver_results(NodeContext& ctx) {
  if (undelivered_.empty()) return;
  for (const auto& s : ctx.peers(Role::storage)) {
    for (const auto& [id, env] : undelivered_) ctx.send(s, ResultDelivery{env});
  }
}

PollResponse ValidatorNode::poll(const core::RequestId& id) const {
  auto r = poll_request(state_, id);
  if (r.status != PollStatus::unknown) return r;
  for (const auto& tx : state_.pending_pool) {
    if (auto* a = std::get_if<core::AccReqTx>(&tx); a && a->req_info.request_id == id) {
      r.status = PollStatus::pending;
    }
  }
  return r;
}

PollResponse poll_request(const ledger::LedgerState& state, const core::RequestId& id) {
  PollResponse r;
  r.request_id = id;
  const auto* rec = state.find_request(id);
  if (!rec) return r;
  using ledger::RequestStage;
  switch (rec->stage) {
    case RequestStage::requested:
    case RequestStage::granted:
      r.status = PollStatus::pending;
      return r;
    case RequestStage::denied:
      r.status = PollStatus::denied;
      r.reason = ledger::to_string(rec->deny_reason);
      return r;
    default: break;
  }
  for (auto it = state.chain.rbegin(); it != state.chain.rend(); ++it) {
    for (const auto& tx : (*it)->transactions) {
      if (auto* l = std::get_if<core::LinkTx>(&tx); l && l->request_id == id) {
        r.status = PollStatus::link;
        r.link = *l;
        return r;
      }
    }
  }
  r.status = PollStatus::denied;
  r.reason = "expired";
  return r;
}

// ---- StorageNode ----

StorageNode::StorageNode(std::string name, std::shared_ptr<storage::StorageService> service,
                         KeyPair keys, std::uint64_t freshness_window)
    : Node(std::move(name), std::move(keys)),
      service_(std::move(service)),
      freshness_window_(freshness_window) {}

void StorageNode::on_message(NodeContext& ctx, const std::string& from, const Message& m) {
  if (auto* d = std::get_if<ResultDelivery>(&m)) {
    auto out = service_->handle_request_result(d->envelope, ctx.now());
    if (!out) {
      if (out.error() != storage::ResultRejection::already_served) {
        ctx.trace("result_rejected:" + storage::to_string(out.error()), from);
      }
    } else if (auto* link = std::get_if<core::LinkTx>(&out.value())) {
      ctx.trace("link_issued", short_ref(link->request_id));
      submit(ctx, *link);
    } else {
      const auto& denial = std::get<storage::Denial>(out.value());
      ctx.trace("result_denied:" + denial.reason, short_ref(denial.request_id));
    }
    // Acknowledge everything so the validator stops resending.
    ctx.send(from, ResultAck{crypto::hash(d->envelope.ciphertext)});
  } else if (auto* r = std::get_if<RedeemRequest>(&m)) {
    auto key = std::make_pair(from, r->correlation);
    if (auto it = answered_.find(key); it != answered_.end()) {
      ctx.send(from, it->second);
      return;
    }
    RedeemResponse resp;
    resp.correlation = r->correlation;
    auto out = service_->redeem(r->token, r->nonce, r->operation, ctx.now());
    if (out) {
      resp.payload = out->payload;
      ctx.trace("redeemed", short_ref(r->token));
      submit(ctx, out->storage_tx);
    } else {
      resp.error = out.error();
      ctx.trace("redeem_rejected:" + storage::to_string(out.error()), short_ref(r->token));
    }
    answered_[key] = resp;
    ctx.send(from, resp);
  } else if (auto* b = std::get_if<BlockAnnounce>(&m)) {
    if (from_validator(b->block, validators_)) confirm_block(b->block);
  }
}

void StorageNode::on_tick(NodeContext& ctx) {
  retransmit_unconfirmed(ctx, freshness_window_);
  if (auto n = service_->expire_links(ctx.now())) ctx.trace("links_expired", std::to_string(n));
}

// ---- UserNode ----

UserNode::UserNode(std::string name, KeyPair keys, std::shared_ptr<crypto::EntropySource> entropy,
                   std::uint64_t freshness_window)
    : Node(std::move(name), std::move(keys)),
      entropy_(std::move(entropy)),
      freshness_window_(freshness_window) {}

core::RequestId UserNode::request_access(NodeContext& ctx, std::uint32_t resource_id,
                                         core::Operation op, bool auto_redeem) {
  TrackedRequest r;
  r.id = core::random_request_id(*entropy_);
  r.resource_id = resource_id;
  r.operation = op;
  r.auto_redeem = auto_redeem;
  r.last_poll = ctx.now();
  submit(ctx, core::build_access_request_tx(keys(), core::ReqInfo{resource_id, op, r.id}, ctx.now()));
  requests_.push_back(r);
  return r.id;
}

TrackedRequest* UserNode::find_mut(const core::RequestId& id) {
  for (auto& r : requests_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

const TrackedRequest* UserNode::find(const core::RequestId& id) const {
  for (const auto& r : requests_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

void UserNode::send_redeem(NodeContext& ctx, TrackedRequest& r, std::uint64_t correlation,
                           std::optional<core::Nonce> nonce) {
  if (!r.grant) return;
  if (r.correlation != correlation) r.presented_nonce = nonce.value_or(r.grant->nonce);
  r.correlation = correlation;
  for (const auto& s : ctx.peers(Role::storage)) {
    ctx.send(s, RedeemRequest{correlation, r.grant->token, r.presented_nonce, r.operation});
  }
}

void UserNode::redeem(NodeContext& ctx, const core::RequestId& id) {
  auto* r = find_mut(id);
  if (!r || !r->grant) throw ArgumentError("no link held for request " + id.hex());
  send_redeem(ctx, *r, next_correlation());
}

void UserNode::on_tick(NodeContext& ctx) {
  retransmit_unconfirmed(ctx, freshness_window_);
  const auto now = ctx.now();
  auto validators = ctx.peers(Role::validator);
  if (validators.empty()) return;
  for (auto& r : requests_) {
    bool waiting = r.status == RequestStatus::submitted || r.status == RequestStatus::pending;
    if (waiting && now > r.last_poll) {
      r.last_poll = now;
      ctx.send(validators[poll_cursor_++ % validators.size()], PollRequest{r.id});
    } else if (r.status == RequestStatus::link && r.correlation != 0 && ctx.retransmit()) {
      send_redeem(ctx, r, r.correlation);
    }
  }
}

void UserNode::on_message(NodeContext& ctx, const std::string&, const Message& m) {
  if (auto* p = std::get_if<PollResponse>(&m)) {
    auto* r = find_mut(p->request_id);
    if (!r || (r->status != RequestStatus::submitted && r->status != RequestStatus::pending)) return;
    switch (p->status) {
      case PollStatus::unknown: break;
      case PollStatus::pending: r->status = RequestStatus::pending; break;
      case PollStatus::denied:
        r->status = RequestStatus::denied;
        r->deny_reason = p->reason;
        ctx.trace("denied:" + p->reason, short_ref(r->id));
        break;
      case PollStatus::link:
        try {
          r->grant = storage::open_link(*p->link, keys());
        } catch (const Error&) {
          ctx.trace("link_unreadable", short_ref(r->id));
          return;
        }
        r->status = RequestStatus::link;
        ctx.trace("link_received", short_ref(r->id));
        if (r->auto_redeem) send_redeem(ctx, *r, next_correlation());
        break;
    }
  } else if (auto* resp = std::get_if<RedeemResponse>(&m)) {
    for (auto& r : requests_) {
      if (r.correlation != resp->correlation || r.status != RequestStatus::link) continue;
      if (resp->error) {
        r.status = RequestStatus::redeem_failed;
        r.redeem_error = resp->error;
        ctx.trace("redeem_failed:" + storage::to_string(*resp->error), short_ref(r.id));
      } else {
        r.status = RequestStatus::redeemed;
        r.payload = resp->payload;
        ctx.trace("access", short_ref(r.id));
      }
      on_redeemed(ctx, r);
      return;
    }
    on_stray_response(ctx, *resp);
  } else if (auto* b = std::get_if<BlockAnnounce>(&m)) {
    if (!from_validator(b->block, validators_)) return;
    last_block_ = b->block;
    confirm_block(b->block);
  }
}

}  // namespace dlacb::net
