#include "dlacb/service/client.hpp"

#include <charconv>

#include "dlacb/core/builders.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::service {

namespace {

template <class E, std::size_t N>
std::optional<E> parse_enum(std::string_view s, const E (&all)[N]) {
  for (auto e : all) {
    if (ledger::to_string(e) == s) return e;
  }
  return std::nullopt;
}

std::uint64_t parse_number(const std::string& s, const char* field) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw UsageError(std::string("invalid ") + field + " '" + s + "'");
  }
  return v;
}

}  // namespace

std::optional<ledger::LogKind> parse_log_kind(std::string_view s) {
  using K = ledger::LogKind;
  static const K all[] = {K::requested, K::authenticated, K::decided, K::link_issued,
                          K::redeemed,  K::denied,        K::expired};
  return parse_enum(s, all);
}

std::optional<ledger::Decision> parse_decision(std::string_view s) {
  using D = ledger::Decision;
  static const D all[] = {D::none, D::granted, D::denied};
  return parse_enum(s, all);
}

std::optional<ledger::DenyReason> parse_deny_reason(std::string_view s) {
  using R = ledger::DenyReason;
  static const R all[] = {R::none, R::unregistered, R::stale, R::bad_signature, R::model, R::rule};
  return parse_enum(s, all);
}

ledger::LogFilter parse_log_query(const LogQuery& q) {
  ledger::LogFilter f;
  if (q.user) {
    try {
      f.user_pk = PublicKey::from_hex(*q.user);
    } catch (const Error&) {
      throw UsageError("invalid user public key '" + *q.user + "'");
    }
  }
  if (q.resource) {
    auto v = parse_number(*q.resource, "resource");
    if (v > UINT32_MAX) throw UsageError("resource out of range");
    f.resource_id = static_cast<std::uint32_t>(v);
  }
  if (q.decision) {
    f.decision = parse_decision(*q.decision);
    if (!f.decision) throw UsageError("invalid decision '" + *q.decision + "'");
  }
  if (q.kind) {
    f.kind = parse_log_kind(*q.kind);
    if (!f.kind) throw UsageError("invalid log kind '" + *q.kind + "'");
  }
  if (q.from) f.min_height = parse_number(*q.from, "from height");
  if (q.to) f.max_height = parse_number(*q.to, "to height");
  return f;
}

LogQuery to_query(const ledger::LogFilter& f) {
  LogQuery q;
  if (f.user_pk) q.user = f.user_pk->hex();
  if (f.resource_id) q.resource = std::to_string(*f.resource_id);
  if (f.decision) q.decision = ledger::to_string(*f.decision);
  if (f.kind) q.kind = ledger::to_string(*f.kind);
  if (f.min_height) q.from = std::to_string(*f.min_height);
  if (f.max_height) q.to = std::to_string(*f.max_height);
  return q;
}

Client::Client(Service& service, std::shared_ptr<crypto::EntropySource> entropy)
    : service_(service), entropy_(entropy ? std::move(entropy) : crypto::system_entropy()) {}

ApiResult<Digest> Client::register_user(const KeyPair& admin, const PublicKey& user) {
  auto now = service_.now();
  if (!now.ok()) return ApiResult<Digest>::failure(now.status, now.detail);
  return service_.submit(core::build_setup_tx(admin, user, *now.value));
}

ApiResult<RequestId> Client::request_access(const KeyPair& user, std::uint32_t resource_id,
                                            std::string_view operation) {
  using R = ApiResult<RequestId>;
  auto op = decision::parse_operation(operation);
  if (!op) return R::failure(Status::usage_error, "invalid operation '" + std::string(operation) + "'");
  auto now = service_.now();
  if (!now.ok()) return R::failure(now.status, now.detail);
  core::ReqInfo info{resource_id, *op, core::random_request_id(*entropy_)};
  auto r = service_.submit(core::build_access_request_tx(user, info, *now.value));
  if (!r.ok()) return R::failure(r.status, r.detail);
  return R::success(info.request_id);
}

ApiResult<PollOutcome> Client::poll(const RequestId& id, const KeyPair& user) {
  using R = ApiResult<PollOutcome>;
  auto r = service_.poll(id);
  if (!r.ok()) return R::failure(r.status, r.detail);
  PollOutcome out;
  out.state = r.value->state;
  out.reason = r.value->reason;
  if (r.value->link) {
    try {
      out.link = LinkView{storage::open_link(*r.value->link, user), r.value->expires_at};
    } catch (const Error& e) {
      return R::failure(Status::access_error, std::string("cannot open link: ") + e.what());
    }
  }
  return R::success(std::move(out));
}

ApiResult<Bytes> Client::redeem(const LinkToken& token, const Nonce& nonce,
                                std::string_view operation) {
  auto op = decision::parse_operation(operation);
  if (!op) {
    return ApiResult<Bytes>::failure(Status::usage_error,
                                     "invalid operation '" + std::string(operation) + "'");
  }
  return service_.redeem(token, nonce, *op);
}

ApiResult<std::vector<ledger::LogEntry>> Client::logs(const LogQuery& query) {
  try {
    return service_.logs(parse_log_query(query));
  } catch (const UsageError& e) {
    return ApiResult<std::vector<ledger::LogEntry>>::failure(Status::usage_error, e.what());
  }
}

ApiResult<std::vector<BlockSummary>> Client::chain(std::uint64_t from, std::uint64_t to) {
  return service_.chain(from, to);
}

}  // namespace dlacb::service
