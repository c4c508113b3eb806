#include "dlacb/ledger/ledger.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "dlacb/core/builders.hpp"
#include "dlacb/core/encoding.hpp"
#include "dlacb/core/render.hpp"
#include "dlacb/decision/model_io.hpp"
#include "dlacb/util/codec.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::ledger {
namespace {

Unexpected<Rejection> reject(RejectReason reason, std::string detail = {}) {
  return unexpected(Rejection{reason, std::move(detail)});
}

Expected<void, Rejection> check_tx(const LedgerState& s, const Transaction& tx, Timestamp now,
                                   bool check_pool) {
  if (std::holds_alternative<VerifiedTx>(tx)) {
    return reject(RejectReason::unauthorized_sender, "T_Verified is produced by the contract only");
  }
  if (!core::verify_transaction_signature(tx, s.config.storage_pk)) {
    return reject(RejectReason::bad_signature);
  }
  if (const auto* setup = std::get_if<SetupTx>(&tx)) {
    const auto& admins = s.config.admin_pks;
    if (std::find(admins.begin(), admins.end(), setup->admin_pk) == admins.end()) {
      return reject(RejectReason::unauthorized_sender, "setup signer is not an admin");
    }
  }
  if (!is_fresh(core::time_of(tx), now, s.config.params.freshness_window)) {
    return reject(RejectReason::stale_time);
  }
  auto id = core::tx_id(tx);
  if (s.tx_ids.count(id)) return reject(RejectReason::duplicate, "already on chain");
  if (check_pool) {
    for (const auto& p : s.pending_pool) {
      if (core::tx_id(p) == id) return reject(RejectReason::duplicate, "already pending");
    }
  }
  return {};
}

struct Context {
  std::uint64_t height = 0;
  Timestamp now = 0;
  std::vector<RequestResult>* results = nullptr;
  std::vector<LogEntry>* entries = nullptr;
};

void log(LedgerState& s, Context& ctx, LogEntry e) {
  if (ctx.entries) ctx.entries->push_back(e);
  s.access_log.push_back(std::move(e));
}

LogEntry request_entry(const RequestRecord& req, const RequestId& id, LogKind kind,
                       const Context& ctx) {
  LogEntry e;
  e.kind = kind;
  e.user_pk = req.user_pk;
  e.resource_id = req.req_info.resource_id;
  e.operation = req.req_info.operation;
  e.request_id = id;
  e.block_height = ctx.height;
  e.time = ctx.now;
  return e;
}

// A link whose nonce could still be redeemed is kept open until no storage
// record stamped inside its lifetime can be fresh any more.
void sweep_expired(LedgerState& s, Context& ctx) {
  const auto window = s.config.params.freshness_window;
  for (auto& [commitment, rec] : s.nonce_registry) {
    if (rec.status != NonceStatus::issued || rec.expires_at + window >= ctx.now) continue;
    rec.status = NonceStatus::expired;
    auto& req = s.requests.at(rec.request_id);
    req.stage = RequestStage::expired;
    auto e = request_entry(req, rec.request_id, LogKind::expired, ctx);
    e.decision = Decision::granted;
    log(s, ctx, e);
  }
}

Expected<void, Rejection> do_register(LedgerState& s, const SetupTx& tx) {
  auto key = crypto::hash(tx.user_pk.view());
  if (s.users.count(key)) return reject(RejectReason::duplicate_user, tx.user_pk.hex());
  UserRecord rec;
  rec.pk = tx.user_pk;
  rec.index = static_cast<std::uint32_t>(s.users.size());
  rec.registered_at = tx.time;
  s.users.emplace(key, rec);
  return {};
}

Expected<void, Rejection> do_record_nonce(LedgerState& s, const Digest& commitment,
                                          const RequestId& request_id, Timestamp issued_at) {
  if (s.nonce_registry.count(commitment)) return reject(RejectReason::replay, "nonce already issued");
  NonceRecord rec;
  rec.request_id = request_id;
  rec.issued_at = issued_at;
  rec.expires_at = issued_at + s.config.params.nonce_lifetime;
  s.nonce_registry.emplace(commitment, rec);
  return {};
}

Expected<NonceRecord*, Rejection> do_redeem(LedgerState& s, const Nonce& nonce, Timestamp now) {
  auto it = s.nonce_registry.find(core::nonce_commitment(nonce));
  if (it == s.nonce_registry.end()) return reject(RejectReason::unknown_nonce);
  auto& rec = it->second;
  if (rec.status == NonceStatus::redeemed) return reject(RejectReason::replay, "nonce already redeemed");
  if (rec.status == NonceStatus::expired || now > rec.expires_at) {
    return reject(RejectReason::expired);
  }
  rec.status = NonceStatus::redeemed;
  return &rec;
}

enum class Mode { produce, verify };

// Applies one network transaction. In verify mode `following` is the next
// block entry, which must equal the locally derived T_Verified whenever
// authentication passes.
Expected<std::optional<VerifiedTx>, Rejection> execute(LedgerState& s, const Transaction& tx,
                                                       const Transaction* following, Mode mode,
                                                       Context& ctx) {
  if (auto ok = check_tx(s, tx, ctx.now, false); !ok) return unexpected(ok.error());
  std::optional<VerifiedTx> produced;

  if (const auto* setup = std::get_if<SetupTx>(&tx)) {
    if (auto r = do_register(s, *setup); !r) return unexpected(r.error());
  } else if (const auto* req_tx = std::get_if<AccReqTx>(&tx)) {
    const auto& id = req_tx->req_info.request_id;
    if (s.requests.count(id)) return reject(RejectReason::duplicate, "request id reused");
    RequestRecord rec;
    rec.user_pk = req_tx->user_pk;
    rec.req_info = req_tx->req_info;
    rec.time = req_tx->time;
    rec.height = ctx.height;
    auto& req = s.requests.emplace(id, rec).first->second;
    log(s, ctx, request_entry(req, id, LogKind::requested, ctx));

    auto auth = authentication_contract(*req_tx, s, ctx.now, ctx.height);
    log(s, ctx, auth.entry);
    const auto* next = following ? std::get_if<VerifiedTx>(following) : nullptr;
    if (!auth.verified) {
      req.stage = RequestStage::denied;
      req.deny_reason = auth.entry.reason;
      if (mode == Mode::verify && next && next->request_id == id) {
        return reject(RejectReason::verified_mismatch, "T_Verified for a failed authentication");
      }
      return produced;
    }
    if (mode == Mode::verify && (!next || !(*next == *auth.verified))) {
      return reject(RejectReason::verified_mismatch, "T_Verified differs from re-execution");
    }
    s.tx_ids.insert(core::tx_id(*auth.verified));

    auto authz = authorization_contract(*auth.verified, s, ctx.now, ctx.height);
    log(s, ctx, authz.entry);
    if (authz.result) {
      req.access_list = authz.result->access_list;
      req.stage = authz.result->granted ? RequestStage::granted : RequestStage::denied;
      if (ctx.results) ctx.results->push_back(*authz.result);
    } else {
      req.stage = RequestStage::denied;
    }
    req.deny_reason = authz.entry.reason;
    produced = std::move(auth.verified);
  } else if (const auto* link = std::get_if<LinkTx>(&tx)) {
    auto it = s.requests.find(link->request_id);
    if (it == s.requests.end() || it->second.stage != RequestStage::granted) {
      return reject(RejectReason::unknown_request, "no granted request " + link->request_id.hex());
    }
    auto r = do_record_nonce(s, link->nonce_commitment, link->request_id, link->issued_at);
    if (!r) return unexpected(r.error());
    it->second.stage = RequestStage::link_issued;
    it->second.nonce_commitment = link->nonce_commitment;
    auto e = request_entry(it->second, link->request_id, LogKind::link_issued, ctx);
    e.decision = Decision::granted;
    log(s, ctx, e);
  } else if (const auto* st = std::get_if<StorageTx>(&tx)) {
    auto commitment = core::nonce_commitment(st->nonce);
    auto it = s.nonce_registry.find(commitment);
    if (it != s.nonce_registry.end() &&
        s.requests.at(it->second.request_id).user_pk != st->user_pk) {
      return reject(RejectReason::unauthorized_sender, "redeemer is not the requester");
    }
    auto r = do_redeem(s, st->nonce, st->time);
    if (!r) return unexpected(r.error());
    auto& req = s.requests.at((*r)->request_id);
    req.stage = RequestStage::redeemed;
    auto e = request_entry(req, (*r)->request_id, LogKind::redeemed, ctx);
    e.decision = Decision::granted;
    log(s, ctx, e);
  }

  s.tx_ids.insert(core::tx_id(tx));
  return produced;
}

void encode_entry(Encoder& e, const LogEntry& l) {
  e.u8(static_cast<std::uint8_t>(l.kind)).fixed(l.user_pk).u32(l.resource_id);
  e.u8(static_cast<std::uint8_t>(l.operation)).u8(static_cast<std::uint8_t>(l.decision));
  e.u8(static_cast<std::uint8_t>(l.reason)).boolean(l.overridden).fixed(l.request_id);
  e.u64(l.block_height).u64(l.time);
}

}  // namespace

Block make_genesis_block(const GenesisConfig& config) {
  Block b;
  b.height = 0;
  b.time = config.genesis_time;
  b.genesis_payload = encode(config);
  return b;
}

LedgerState genesis(const GenesisConfig& config,
                    std::shared_ptr<const decision::DecisionModel> model) {
  if (config.validators.size() < kMinValidators) {
    throw ConfigError("need at least 3 validators, got " + std::to_string(config.validators.size()));
  }
  if (config.admin_pks.empty()) throw ConfigError("genesis needs at least one admin key");
  std::set<PublicKey> unique(config.validators.begin(), config.validators.end());
  if (unique.size() != config.validators.size()) throw ConfigError("duplicate validator key");
  if (config.params.block_interval == 0) throw ConfigError("block interval must be positive");
  if (!model) throw ConfigError("genesis needs a decision model");
  if (decision::model_fingerprint(*model) != config.engine_fingerprint) {
    throw ConfigError("model fingerprint does not match genesis");
  }
  try {
    decision::validate_rules(config.rules);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }

  LedgerState s;
  s.config = config;
  auto block = std::make_shared<const Block>(make_genesis_block(config));
  s.genesis_hash = core::block_hash(*block);
  s.chain.push_back(std::move(block));
  try {
    s.engine = std::make_shared<const decision::DecisionEngine>(std::move(model), config.rules,
                                                                config.engine);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("decision engine: ") + e.what());
  }
  return s;
}

LedgerState genesis_from_block(const Block& block,
                               std::shared_ptr<const decision::DecisionModel> model) {
  if (block.height != 0 || block.genesis_payload.empty()) {
    throw ConfigError("not a genesis block");
  }
  GenesisConfig config;
  try {
    config = decode_genesis_config(block.genesis_payload);
  } catch (const Error& e) {
    throw ConfigError(std::string("bad genesis payload: ") + e.what());
  }
  auto s = genesis(config, std::move(model));
  if (s.genesis_hash != core::block_hash(block)) throw ConfigError("genesis block is not canonical");
  return s;
}

const PublicKey& expected_leader(std::uint64_t height, std::span<const PublicKey> validators) {
  if (validators.empty()) throw ArgumentError("empty validator list");
  return validators[height % validators.size()];
}

Expected<void, Rejection> validate_transaction(const LedgerState& state, const Transaction& tx,
                                               Timestamp now) {
  return check_tx(state, tx, now, true);
}

Expected<Applied, Rejection> apply_block(const LedgerState& state, const Block& block) {
  const auto& p = state.config.params;
  if (block.height <= state.height()) return reject(RejectReason::bad_height);
  if (block.prev_hash != state.tip_hash()) return reject(RejectReason::broken_chain);
  if (block.time != state.config.genesis_time + block.height * p.block_interval ||
      block.time <= state.tip().time) {
    return reject(RejectReason::bad_time, "block time does not match its slot");
  }
  if (!block.genesis_payload.empty()) return reject(RejectReason::malformed, "genesis payload");
  if (block.validator_pk != expected_leader(block.height, state.config.validators)) {
    return reject(RejectReason::wrong_leader);
  }
  if (!core::verify_block_signature(block)) return reject(RejectReason::bad_signature, "block");

  Applied out{state, {}, {}};
  auto& s = out.state;
  s.pending_pool.clear();
  Context ctx{block.height, block.time, &out.results, &out.new_entries};
  sweep_expired(s, ctx);

  const auto& txs = block.transactions;
  for (std::size_t i = 0; i < txs.size(); ++i) {
    const Transaction* next = i + 1 < txs.size() ? &txs[i + 1] : nullptr;
    auto r = execute(s, txs[i], next, Mode::verify, ctx);
    if (!r) {
      auto err = r.error();
      err.detail = "tx " + std::to_string(i) + (err.detail.empty() ? "" : ": " + err.detail);
      return unexpected(std::move(err));
    }
    if (r.value()) ++i;  // the matching T_Verified was consumed
  }
  s.chain.push_back(std::make_shared<const Block>(block));
  s.pending_pool = state.pending_pool;
  return out;
}

Expected<LedgerState, Rejection> register_user(const LedgerState& state, const SetupTx& tx) {
  LedgerState s = state;
  if (auto r = do_register(s, tx); !r) return unexpected(r.error());
  return s;
}

Expected<LedgerState, Rejection> record_nonce(const LedgerState& state, const Digest& commitment,
                                              const RequestId& request_id, Timestamp issued_at) {
  LedgerState s = state;
  if (auto r = do_record_nonce(s, commitment, request_id, issued_at); !r) {
    return unexpected(r.error());
  }
  return s;
}

Expected<LedgerState, Rejection> redeem_nonce(const LedgerState& state, const Nonce& nonce,
                                              Timestamp now) {
  LedgerState s = state;
  if (auto r = do_redeem(s, nonce, now); !r) return unexpected(r.error());
  return s;
}

SealOutcome build_block(const LedgerState& state, std::span<const Transaction> pool,
                        const KeyPair& leader, std::uint64_t height, Timestamp now) {
  SealOutcome out;
  LedgerState scratch = state;
  Context ctx{height, now, nullptr, nullptr};
  sweep_expired(scratch, ctx);
  Block& b = out.block;
  b.height = height;
  b.prev_hash = state.tip_hash();
  b.time = now;
  for (const auto& tx : pool) {
    // Work on a copy so a transaction that fails half way leaves no trace.
    LedgerState attempt = scratch;
    auto r = execute(attempt, tx, nullptr, Mode::produce, ctx);
    if (!r) {
      out.dropped.emplace_back(tx, r.error());
      continue;
    }
    scratch = std::move(attempt);
    b.transactions.push_back(tx);
    if (r.value()) b.transactions.emplace_back(std::move(*r.value()));
  }
  b = core::seal(std::move(b), leader);
  return out;
}

std::vector<LogEntry> query_access_log(const LedgerState& state, const LogFilter& f) {
  std::vector<LogEntry> out;
  for (const auto& e : state.access_log) {
    if (f.user_pk && e.user_pk != *f.user_pk) continue;
    if (f.resource_id && e.resource_id != *f.resource_id) continue;
    if (f.decision && e.decision != *f.decision) continue;
    if (f.kind && e.kind != *f.kind) continue;
    if (f.min_height && e.block_height < *f.min_height) continue;
    if (f.max_height && e.block_height > *f.max_height) continue;
    out.push_back(e);
  }
  return out;
}

std::size_t fork_choice(std::span<const Chain> candidates) {
  std::size_t best = candidates.size();
  Digest best_tip;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (c.empty()) continue;
    auto tip = core::block_hash(c.back());
    bool better = best == candidates.size() || c.size() > candidates[best].size() ||
                  (c.size() == candidates[best].size() && tip < best_tip);
    if (better) {
      best = i;
      best_tip = tip;
    }
  }
  if (best == candidates.size()) throw ArgumentError("fork choice over no chains");
  return best;
}

Expected<LedgerState, Rejection> replay_chain(std::span<const Block> blocks,
                                              std::shared_ptr<const decision::DecisionModel> model) {
  if (blocks.empty()) return reject(RejectReason::malformed, "empty chain");
  LedgerState s;
  try {
    s = genesis_from_block(blocks.front(), std::move(model));
  } catch (const ConfigError& e) {
    return reject(RejectReason::malformed, e.what());
  }
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    auto r = apply_block(s, blocks[i]);
    if (!r) {
      auto err = r.error();
      err.detail = "block " + std::to_string(i) + (err.detail.empty() ? "" : ": " + err.detail);
      return unexpected(std::move(err));
    }
    s = std::move(r.value().state);
  }
  return s;
}

Chain chain_of(const LedgerState& state) {
  Chain c;
  c.reserve(state.chain.size());
  for (const auto& b : state.chain) c.push_back(*b);
  return c;
}

Bytes encode_state(const LedgerState& s) {
  Encoder e;
  e.fixed(s.genesis_hash);
  e.u64(s.chain.size());
  for (const auto& b : s.chain) e.fixed(core::block_hash(*b));
  e.u64(s.users.size());
  for (const auto& [key, u] : s.users) e.fixed(key).fixed(u.pk).u32(u.index).u64(u.registered_at);
  e.u64(s.nonce_registry.size());
  for (const auto& [key, n] : s.nonce_registry) {
    e.fixed(key).fixed(n.request_id).u64(n.issued_at).u64(n.expires_at);
    e.u8(static_cast<std::uint8_t>(n.status));
  }
  e.u64(s.requests.size());
  for (const auto& [id, r] : s.requests) {
    e.fixed(id).fixed(r.user_pk);
    core::encode_into(e, r.req_info);
    e.u64(r.time).u64(r.height).u8(static_cast<std::uint8_t>(r.stage));
    e.u8(static_cast<std::uint8_t>(r.deny_reason));
    for (bool a : r.access_list) e.boolean(a);
    e.boolean(r.nonce_commitment.has_value());
    if (r.nonce_commitment) e.fixed(*r.nonce_commitment);
  }
  e.u64(s.access_log.size());
  for (const auto& l : s.access_log) encode_entry(e, l);
  e.u64(s.tx_ids.size());
  for (const auto& id : s.tx_ids) e.fixed(id);
  return std::move(e).take();
}

Digest state_digest(const LedgerState& state) { return crypto::hash(encode_state(state)); }

std::string render_state(const LedgerState& s) {
  std::ostringstream out;
  out << "genesis " << s.genesis_hash.hex() << "\n";
  out << "height " << s.height() << " tip " << s.tip_hash().hex() << "\n";
  out << "state " << state_digest(s).hex() << "\n";
  out << "validators";
  for (const auto& v : s.config.validators) out << " " << core::short_hex(v.view());
  out << "\nusers " << s.users.size() << "\n";
  std::vector<const UserRecord*> by_index;
  for (const auto& [k, u] : s.users) by_index.push_back(&u);
  std::sort(by_index.begin(), by_index.end(),
            [](const auto* a, const auto* b) { return a->index < b->index; });
  for (const auto* u : by_index) {
    out << "  user " << u->index << " " << u->pk.hex() << " registered " << u->registered_at << "\n";
  }
  out << "nonces " << s.nonce_registry.size() << "\n";
  for (const auto& [k, n] : s.nonce_registry) {
    static const char* names[] = {"issued", "redeemed", "expired"};
    out << "  nonce " << core::short_hex(k.view()) << " request " << n.request_id.hex()
        << " issued " << n.issued_at << " expires " << n.expires_at << " "
        << names[static_cast<int>(n.status)] << "\n";
  }
  out << "log " << s.access_log.size() << "\n";
  for (const auto& e : s.access_log) out << "  " << to_text(e) << "\n";
  return out.str();
}

}  // namespace dlacb::ledger
