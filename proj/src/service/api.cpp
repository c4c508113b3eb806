#include "dlacb/service/api.hpp"

#include <condition_variable>
#include <map>

#include "dlacb/core/encoding.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::service {

namespace {

constexpr Status kAllStatuses[] = {Status::ok,           Status::not_admin,    Status::duplicate,
                                   Status::usage_error,  Status::rejected,     Status::access_error,
                                   Status::redeem_failed, Status::not_found,   Status::unavailable};

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::not_admin: return "not_admin";
    case Status::duplicate: return "duplicate";
    case Status::usage_error: return "usage_error";
    case Status::rejected: return "rejected";
    case Status::access_error: return "access_error";
    case Status::redeem_failed: return "redeem_failed";
    case Status::not_found: return "not_found";
    case Status::unavailable: return "unavailable";
  }
  return "?";
}

std::optional<Status> parse_status(std::string_view name) {
  for (auto s : kAllStatuses) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string to_string(PollState s) {
  switch (s) {
    case PollState::pending: return "pending";
    case PollState::denied: return "denied";
    case PollState::link: return "link";
  }
  return "?";
}

std::string to_text(const BlockSummary& b) {
  std::string out = std::to_string(b.height) + " " + b.hash.hex() + " t=" + std::to_string(b.time) +
                    " by " + b.validator.hex().substr(0, 16) + " [";
  for (std::size_t i = 0; i < b.kinds.size(); ++i) out += (i ? " " : "") + b.kinds[i];
  return out + "]";
}

// ---- LocalService ----

LocalService::LocalService(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {}

ApiResult<Digest> LocalService::submit(const core::Transaction& tx) {
  using R = ApiResult<Digest>;
  if (std::holds_alternative<core::VerifiedTx>(tx)) {
    return R::failure(Status::rejected, "T_Verified is derived by validators, not submitted");
  }
  auto snap = backend_->snapshot();
  if (auto* setup = std::get_if<core::SetupTx>(&tx)) {
    const auto& admins = snap->config.admin_pks;
    if (std::find(admins.begin(), admins.end(), setup->admin_pk) == admins.end()) {
      return R::failure(Status::not_admin, "signer is not an administrator");
    }
    if (snap->find_user(setup->user_pk)) {
      return R::failure(Status::duplicate, "user already registered");
    }
  }
  auto ok = ledger::validate_transaction(*snap, tx, backend_->now());
  if (!ok) {
    auto reason = ok.error().reason;
    auto status = reason == ledger::RejectReason::duplicate ? Status::duplicate
                  : reason == ledger::RejectReason::unauthorized_sender ? Status::not_admin
                                                                         : Status::rejected;
    return R::failure(status, ledger::to_string(reason) + ": " + ok.error().detail);
  }
  backend_->submit(tx);
  return R::success(core::tx_id(tx));
}

ApiResult<PollView> LocalService::poll(const RequestId& id) {
  auto snap = backend_->snapshot();
  auto r = net::poll_request(*snap, id);
  PollView v;
  switch (r.status) {
    case net::PollStatus::unknown:
    case net::PollStatus::pending: v.state = PollState::pending; break;
    case net::PollStatus::denied:
      v.state = PollState::denied;
      v.reason = r.reason;
      break;
    case net::PollStatus::link: {
      v.state = PollState::link;
      v.link = r.link;
      auto it = snap->nonce_registry.find(r.link->nonce_commitment);
      if (it != snap->nonce_registry.end()) v.expires_at = it->second.expires_at;
      break;
    }
  }
  return ApiResult<PollView>::success(std::move(v));
}

ApiResult<Bytes> LocalService::redeem(const LinkToken& token, const Nonce& nonce,
                                      decision::Operation op) {
  auto r = backend_->redeem(token, nonce, op);
  if (!r) return ApiResult<Bytes>::failure(Status::unavailable, "storage did not answer");
  if (!*r) return ApiResult<Bytes>::failure(Status::redeem_failed, storage::to_string(r->error()));
  return ApiResult<Bytes>::success(std::move(r->value()));
}

ApiResult<std::vector<ledger::LogEntry>> LocalService::logs(const ledger::LogFilter& filter) {
  return ApiResult<std::vector<ledger::LogEntry>>::success(
      ledger::query_access_log(*backend_->snapshot(), filter));
}

ApiResult<std::vector<BlockSummary>> LocalService::chain(std::uint64_t from, std::uint64_t to) {
  auto snap = backend_->snapshot();
  std::vector<BlockSummary> out;
  for (const auto& b : snap->chain) {
    if (b->height < from || b->height > to) continue;
    BlockSummary s{b->height, core::block_hash(*b), b->time, b->validator_pk, {}};
    for (const auto& tx : b->transactions) s.kinds.push_back(core::kind_name(core::kind_of(tx)));
    out.push_back(std::move(s));
  }
  return ApiResult<std::vector<BlockSummary>>::success(std::move(out));
}

ApiResult<Timestamp> LocalService::now() { return ApiResult<Timestamp>::success(backend_->now()); }

// ---- SimBackend ----

SimBackend::SimBackend(net::World& world, std::uint64_t settle_ticks)
    : world_(world), settle_ticks_(settle_ticks) {}

Timestamp SimBackend::now() { return world_.now(); }

std::shared_ptr<const ledger::LedgerState> SimBackend::snapshot() {
  for (std::size_t i = 0; i < world_.validator_count(); ++i) {
    if (!world_.crashed("v" + std::to_string(i))) {
      return std::make_shared<const ledger::LedgerState>(world_.validator(i).state());
    }
  }
  throw ConfigError("no live validator in the simulation");
}

void SimBackend::submit(const core::Transaction& tx) {
  world_.submit_transaction("admin", tx);
  world_.run_until_converged(settle_ticks_);
}

std::optional<Expected<Bytes, storage::RedeemError>> SimBackend::redeem(const LinkToken& token,
                                                                        const Nonce& nonce,
                                                                        decision::Operation op) {
  auto& node = world_.storage();
  auto& ctx = world_.context(node.name());
  auto r = node.service().redeem(token, nonce, op, world_.now());
  if (!r) {
    ctx.trace("redeem_rejected:" + storage::to_string(r.error()), token.hex().substr(0, 12));
    return Expected<Bytes, storage::RedeemError>(unexpected(r.error()));
  }
  ctx.trace("redeemed", token.hex().substr(0, 12));
  node.submit(ctx, r->storage_tx);
  world_.run_until_converged(settle_ticks_);
  return Expected<Bytes, storage::RedeemError>(std::move(r->payload));
}

// ---- LiveBackend ----

struct LiveBackend::Waiting {
  std::mutex mu;
  std::condition_variable cv;
  struct Slot {
    bool answered = false;
    net::RedeemResponse response;
  };
  std::map<std::uint64_t, Slot> slots;
  std::uint64_t next = std::uint64_t{1} << 48;
};

LiveBackend::LiveBackend(net::LiveRunner& host, std::string storage_name,
                         std::chrono::milliseconds timeout)
    : host_(host),
      storage_name_(std::move(storage_name)),
      timeout_(timeout),
      waiting_(std::make_shared<Waiting>()) {
  std::weak_ptr<Waiting> weak = waiting_;
  host_.set_listener([weak](const net::Frame& f) {
    auto* resp = std::get_if<net::RedeemResponse>(&f.message);
    auto w = weak.lock();
    if (!resp || !w) return;
    std::lock_guard lock(w->mu);
    auto it = w->slots.find(resp->correlation);
    if (it == w->slots.end()) return;
    it->second.answered = true;
    it->second.response = *resp;
    w->cv.notify_all();
  });
}

LiveBackend::~LiveBackend() { host_.set_listener({}); }

Timestamp LiveBackend::now() {
  Timestamp t = 0;
  host_.with_node([&](net::Node&, net::NodeContext& ctx) { t = ctx.now(); });
  return t;
}

std::shared_ptr<const ledger::LedgerState> LiveBackend::snapshot() {
  std::shared_ptr<const ledger::LedgerState> out;
  host_.with_node([&](net::Node& n, net::NodeContext&) {
    auto& v = dynamic_cast<net::ValidatorNode&>(n);
    out = std::make_shared<const ledger::LedgerState>(v.state());
  });
  return out;
}

void LiveBackend::submit(const core::Transaction& tx) {
  host_.with_node([&](net::Node& n, net::NodeContext& ctx) { n.submit(ctx, tx); });
}

std::optional<Expected<Bytes, storage::RedeemError>> LiveBackend::redeem(const LinkToken& token,
                                                                         const Nonce& nonce,
                                                                         decision::Operation op) {
  std::uint64_t corr = 0;
  {
    std::lock_guard lock(waiting_->mu);
    corr = waiting_->next++;
    waiting_->slots[corr] = {};
  }
  host_.with_node([&](net::Node&, net::NodeContext& ctx) {
    ctx.send(storage_name_, net::RedeemRequest{corr, token, nonce, op});
  });
  std::unique_lock lock(waiting_->mu);
  waiting_->cv.wait_for(lock, timeout_, [&] { return waiting_->slots[corr].answered; });
  auto slot = std::move(waiting_->slots.extract(corr).mapped());
  if (!slot.answered) return std::nullopt;
  if (slot.response.error) {
    return Expected<Bytes, storage::RedeemError>(unexpected(*slot.response.error));
  }
  return Expected<Bytes, storage::RedeemError>(std::move(slot.response.payload));
}

}  // namespace dlacb::service
