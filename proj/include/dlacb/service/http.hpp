#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "dlacb/service/api.hpp"

namespace httplib {
class Server;
}

namespace dlacb::service {

// JSON over HTTP. Routes:
//   GET  /v1/now
//   POST /v1/tx          {"tx": hex of the canonical encoding}
//   GET  /v1/poll?request_id=hex
//   POST /v1/redeem      {"token", "nonce", "operation"}
//   GET  /v1/logs?user=&resource=&decision=&kind=&from=&to=
//   GET  /v1/chain?from=&to=
// Every reply has "status" (see Status) and "detail".
class HttpServer {
 public:
  // Port 0 picks a free port. Calls into the service are serialized.
  HttpServer(Service& service, std::string host, std::uint16_t port);
  ~HttpServer();
  std::uint16_t port() const { return port_; }
  void start();
  void stop();

 private:
  void routes();

  Service& service_;
  std::mutex mu_;
  std::unique_ptr<httplib::Server> server_;
  std::string host_;
  std::uint16_t port_ = 0;
  std::thread thread_;
};

class HttpService final : public Service {
 public:
  HttpService(std::string host, std::uint16_t port);

  ApiResult<Digest> submit(const core::Transaction& tx) override;
  ApiResult<PollView> poll(const RequestId& id) override;
  ApiResult<Bytes> redeem(const LinkToken& token, const Nonce& nonce,
                          decision::Operation op) override;
  ApiResult<std::vector<ledger::LogEntry>> logs(const ledger::LogFilter& filter) override;
  ApiResult<std::vector<BlockSummary>> chain(std::uint64_t from, std::uint64_t to) override;
  ApiResult<Timestamp> now() override;

 private:
  std::string host_;
  std::uint16_t port_;
};

}  // namespace dlacb::service
