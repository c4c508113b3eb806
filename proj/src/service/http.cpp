#include "dlacb/service/http.hpp"

#include <httplib.h>

#include <json.hpp>

#include "dlacb/core/encoding.hpp"
#include "dlacb/service/client.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::service {

using json = nlohmann::json;

namespace {

json entry_json(const ledger::LogEntry& e) {
  return {{"kind", ledger::to_string(e.kind)},
          {"user", e.user_pk.hex()},
          {"resource", e.resource_id},
          {"operation", decision::operation_name(e.operation)},
          {"decision", ledger::to_string(e.decision)},
          {"reason", ledger::to_string(e.reason)},
          {"overridden", e.overridden},
          {"request_id", e.request_id.hex()},
          {"height", e.block_height},
          {"time", e.time}};
}

ledger::LogEntry entry_from(const json& j) {
  ledger::LogEntry e;
  auto kind = parse_log_kind(j.at("kind").get<std::string>());
  auto decision = parse_decision(j.at("decision").get<std::string>());
  auto reason = parse_deny_reason(j.at("reason").get<std::string>());
  auto op = decision::parse_operation(j.at("operation").get<std::string>());
  if (!kind || !decision || !reason || !op) throw FormatError("malformed log entry");
  e.kind = *kind;
  e.decision = *decision;
  e.reason = *reason;
  e.operation = *op;
  e.user_pk = PublicKey::from_hex(j.at("user").get<std::string>());
  e.resource_id = j.at("resource").get<std::uint32_t>();
  e.overridden = j.at("overridden").get<bool>();
  e.request_id = RequestId::from_hex(j.at("request_id").get<std::string>());
  e.block_height = j.at("height").get<std::uint64_t>();
  e.time = j.at("time").get<Timestamp>();
  return e;
}

json block_json(const BlockSummary& b) {
  return {{"height", b.height},
          {"hash", b.hash.hex()},
          {"time", b.time},
          {"validator", b.validator.hex()},
          {"kinds", b.kinds}};
}

BlockSummary block_from(const json& j) {
  return BlockSummary{j.at("height").get<std::uint64_t>(), Digest::from_hex(j.at("hash").get<std::string>()),
                      j.at("time").get<Timestamp>(),
                      PublicKey::from_hex(j.at("validator").get<std::string>()),
                      j.at("kinds").get<std::vector<std::string>>()};
}

template <class T>
json head(const ApiResult<T>& r) {
  return {{"status", to_string(r.status)}, {"detail", r.detail}};
}

void reply(httplib::Response& res, const json& body) {
  res.set_content(body.dump(), "application/json");
}

void usage(httplib::Response& res, const std::string& detail) {
  res.status = 400;
  reply(res, {{"status", "usage_error"}, {"detail", detail}});
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

}  // namespace

HttpServer::HttpServer(Service& service, std::string host, std::uint16_t port)
    : service_(service), server_(std::make_unique<httplib::Server>()), host_(std::move(host)) {
  routes();
  if (port == 0) {
    int p = server_->bind_to_any_port(host_);
    if (p < 0) throw Error("cannot bind HTTP server on " + host_);
    port_ = static_cast<std::uint16_t>(p);
  } else {
    if (!server_->bind_to_port(host_, port)) {
      throw Error("cannot bind HTTP server on " + host_ + ":" + std::to_string(port));
    }
    port_ = port;
  }
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start() {
  if (thread_.joinable()) return;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void HttpServer::routes() {
  auto& s = *server_;
  s.Get("/v1/now", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mu_);
    auto r = service_.now();
    auto body = head(r);
    if (r.value) body["now"] = *r.value;
    reply(res, body);
  });
  s.Post("/v1/tx", [this](const httplib::Request& req, httplib::Response& res) {
    core::Transaction tx;
    try {
      tx = core::decode_transaction(from_hex(json::parse(req.body).at("tx").get<std::string>()));
    } catch (const std::exception& e) {
      return usage(res, std::string("malformed transaction: ") + e.what());
    }
    std::lock_guard lock(mu_);
    auto r = service_.submit(tx);
    auto body = head(r);
    if (r.value) body["tx_id"] = r.value->hex();
    reply(res, body);
  });
  s.Get("/v1/poll", [this](const httplib::Request& req, httplib::Response& res) {
    RequestId id;
    try {
      id = RequestId::from_hex(req.get_param_value("request_id"));
    } catch (const Error& e) {
      return usage(res, std::string("malformed request_id: ") + e.what());
    }
    std::lock_guard lock(mu_);
    auto r = service_.poll(id);
    auto body = head(r);
    if (r.value) {
      body["state"] = to_string(r.value->state);
      body["reason"] = r.value->reason;
      body["expires_at"] = r.value->expires_at;
      if (r.value->link) body["link"] = to_hex(core::encode(core::Transaction{*r.value->link}));
    }
    reply(res, body);
  });
  s.Post("/v1/redeem", [this](const httplib::Request& req, httplib::Response& res) {
    LinkToken token;
    Nonce nonce;
    std::optional<decision::Operation> op;
    try {
      auto j = json::parse(req.body);
      token = LinkToken::from_hex(j.at("token").get<std::string>());
      nonce = Nonce::from_hex(j.at("nonce").get<std::string>());
      op = decision::parse_operation(j.at("operation").get<std::string>());
    } catch (const std::exception& e) {
      return usage(res, std::string("malformed redeem body: ") + e.what());
    }
    if (!op) return usage(res, "invalid operation");
    std::lock_guard lock(mu_);
    auto r = service_.redeem(token, nonce, *op);
    auto body = head(r);
    if (r.value) body["payload"] = to_hex(*r.value);
    reply(res, body);
  });
  s.Get("/v1/logs", [this](const httplib::Request& req, httplib::Response& res) {
    ledger::LogFilter filter;
    try {
      filter = parse_log_query(LogQuery{param(req, "user"), param(req, "resource"),
                                        param(req, "decision"), param(req, "kind"),
                                        param(req, "from"), param(req, "to")});
    } catch (const UsageError& e) {
      return usage(res, e.what());
    }
    std::lock_guard lock(mu_);
    auto r = service_.logs(filter);
    auto body = head(r);
    if (r.value) {
      body["entries"] = json::array();
      for (const auto& e : *r.value) body["entries"].push_back(entry_json(e));
    }
    reply(res, body);
  });
  s.Get("/v1/chain", [this](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t from = 0;
    std::uint64_t to = UINT64_MAX;
    try {
      if (req.has_param("from")) from = std::stoull(req.get_param_value("from"));
      if (req.has_param("to")) to = std::stoull(req.get_param_value("to"));
    } catch (const std::exception&) {
      return usage(res, "malformed height range");
    }
    std::lock_guard lock(mu_);
    auto r = service_.chain(from, to);
    auto body = head(r);
    if (r.value) {
      body["blocks"] = json::array();
      for (const auto& b : *r.value) body["blocks"].push_back(block_json(b));
    }
    reply(res, body);
  });
}

// ---- HttpService ----

namespace {

struct Reply {
  Status status = Status::unavailable;
  std::string detail;
  json body;
};

Reply exchange(const std::string& host, std::uint16_t port, const std::string& method,
               const std::string& path, const json* payload) {
  httplib::Client cli(host, port);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(30);
  auto res = method == "GET" ? cli.Get(path)
                             : cli.Post(path, payload->dump(), "application/json");
  if (!res) return {Status::unavailable, "cannot reach " + host + ":" + std::to_string(port), {}};
  Reply out;
  try {
    out.body = json::parse(res->body);
    auto status = parse_status(out.body.at("status").get<std::string>());
    if (!status) return {Status::unavailable, "unknown status in reply", {}};
    out.status = *status;
    out.detail = out.body.value("detail", "");
  } catch (const std::exception& e) {
    return {Status::unavailable, std::string("malformed reply: ") + e.what(), {}};
  }
  return out;
}

template <class T, class F>
ApiResult<T> decode_reply(const Reply& r, F&& extract) {
  if (r.status != Status::ok) return ApiResult<T>::failure(r.status, r.detail);
  try {
    return ApiResult<T>::success(extract(r.body));
  } catch (const std::exception& e) {
    return ApiResult<T>::failure(Status::unavailable, std::string("malformed reply: ") + e.what());
  }
}

std::string query_string(const LogQuery& q) {
  httplib::Params params;
  if (q.user) params.emplace("user", *q.user);
  if (q.resource) params.emplace("resource", *q.resource);
  if (q.decision) params.emplace("decision", *q.decision);
  if (q.kind) params.emplace("kind", *q.kind);
  if (q.from) params.emplace("from", *q.from);
  if (q.to) params.emplace("to", *q.to);
  return httplib::detail::params_to_query_str(params);
}

}  // namespace

HttpService::HttpService(std::string host, std::uint16_t port) : host_(std::move(host)), port_(port) {}

ApiResult<Timestamp> HttpService::now() {
  return decode_reply<Timestamp>(exchange(host_, port_, "GET", "/v1/now", nullptr),
                                 [](const json& j) { return j.at("now").get<Timestamp>(); });
}

ApiResult<Digest> HttpService::submit(const core::Transaction& tx) {
  json body = {{"tx", to_hex(core::encode(tx))}};
  return decode_reply<Digest>(exchange(host_, port_, "POST", "/v1/tx", &body), [](const json& j) {
    return Digest::from_hex(j.at("tx_id").get<std::string>());
  });
}

ApiResult<PollView> HttpService::poll(const RequestId& id) {
  return decode_reply<PollView>(
      exchange(host_, port_, "GET", "/v1/poll?request_id=" + id.hex(), nullptr), [](const json& j) {
        PollView v;
        auto state = j.at("state").get<std::string>();
        v.state = state == "link" ? PollState::link
                  : state == "denied" ? PollState::denied
                                      : PollState::pending;
        v.reason = j.at("reason").get<std::string>();
        v.expires_at = j.at("expires_at").get<Timestamp>();
        if (j.contains("link")) {
          auto tx = core::decode_transaction(from_hex(j.at("link").get<std::string>()));
          v.link = std::get<core::LinkTx>(tx);
        }
        return v;
      });
}

ApiResult<Bytes> HttpService::redeem(const LinkToken& token, const Nonce& nonce,
                                     decision::Operation op) {
  json body = {{"token", token.hex()},
               {"nonce", nonce.hex()},
               {"operation", decision::operation_name(op)}};
  return decode_reply<Bytes>(exchange(host_, port_, "POST", "/v1/redeem", &body),
                             [](const json& j) { return from_hex(j.at("payload").get<std::string>()); });
}

ApiResult<std::vector<ledger::LogEntry>> HttpService::logs(const ledger::LogFilter& filter) {
  auto qs = query_string(to_query(filter));
  return decode_reply<std::vector<ledger::LogEntry>>(
      exchange(host_, port_, "GET", "/v1/logs" + (qs.empty() ? "" : "?" + qs), nullptr),
      [](const json& j) {
        std::vector<ledger::LogEntry> out;
        for (const auto& e : j.at("entries")) out.push_back(entry_from(e));
        return out;
      });
}

ApiResult<std::vector<BlockSummary>> HttpService::chain(std::uint64_t from, std::uint64_t to) {
  auto path = "/v1/chain?from=" + std::to_string(from) + "&to=" + std::to_string(to);
  return decode_reply<std::vector<BlockSummary>>(
      exchange(host_, port_, "GET", path, nullptr), [](const json& j) {
        std::vector<BlockSummary> out;
        for (const auto& b : j.at("blocks")) out.push_back(block_from(b));
        return out;
      });
}

}  // namespace dlacb::service
