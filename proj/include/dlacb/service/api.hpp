#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dlacb/ledger/ledger.hpp"
#include "dlacb/net/live.hpp"
#include "dlacb/net/world.hpp"
#include "dlacb/storage/storage.hpp"

namespace dlacb::service {

using core::Digest;
using core::KeyPair;
using core::LinkToken;
using core::Nonce;
using core::PublicKey;
using core::RequestId;
using core::Timestamp;

// Every response carries exactly one of these.
enum class Status : std::uint8_t {
  ok,
  not_admin,
  duplicate,
  usage_error,
  rejected,
  access_error,
  redeem_failed,
  not_found,
  unavailable,
};
std::string to_string(Status s);
std::optional<Status> parse_status(std::string_view name);

template <class T>
struct ApiResult {
  Status status = Status::ok;
  std::string detail;
  std::optional<T> value;

  bool ok() const { return status == Status::ok; }
  static ApiResult success(T v) { return ApiResult{Status::ok, {}, std::move(v)}; }
  static ApiResult failure(Status s, std::string detail) { return ApiResult{s, std::move(detail), {}}; }
};

enum class PollState : std::uint8_t { pending, denied, link };
std::string to_string(PollState s);

struct PollView {
  PollState state = PollState::pending;
  std::string reason;
  std::optional<core::LinkTx> link;
  Timestamp expires_at = 0;
};

struct BlockSummary {
  std::uint64_t height = 0;
  Digest hash;
  Timestamp time = 0;
  PublicKey validator;
  std::vector<std::string> kinds;
  bool operator==(const BlockSummary&) const = default;
};

// Wire-level operations. Transactions arrive signed; keys never reach the
// service.
class Service {
 public:
  virtual ~Service() = default;
  virtual ApiResult<Digest> submit(const core::Transaction& tx) = 0;
  virtual ApiResult<PollView> poll(const RequestId& id) = 0;
  virtual ApiResult<Bytes> redeem(const LinkToken& token, const Nonce& nonce,
                                  decision::Operation op) = 0;
  virtual ApiResult<std::vector<ledger::LogEntry>> logs(const ledger::LogFilter& filter) = 0;
  // Inclusive heights; clipped to the tip.
  virtual ApiResult<std::vector<BlockSummary>> chain(std::uint64_t from, std::uint64_t to) = 0;
  virtual ApiResult<Timestamp> now() = 0;
};

// Where a LocalService gets its ledger view and sends its work.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Timestamp now() = 0;
  virtual std::shared_ptr<const ledger::LedgerState> snapshot() = 0;
  virtual void submit(const core::Transaction& tx) = 0;
  // nullopt when storage did not answer in time.
  virtual std::optional<Expected<Bytes, storage::RedeemError>> redeem(const LinkToken& token,
                                                                      const Nonce& nonce,
                                                                      decision::Operation op) = 0;
};

class LocalService final : public Service {
 public:
  explicit LocalService(std::shared_ptr<Backend> backend);

  ApiResult<Digest> submit(const core::Transaction& tx) override;
  ApiResult<PollView> poll(const RequestId& id) override;
  ApiResult<Bytes> redeem(const LinkToken& token, const Nonce& nonce,
                          decision::Operation op) override;
  ApiResult<std::vector<ledger::LogEntry>> logs(const ledger::LogFilter& filter) override;
  ApiResult<std::vector<BlockSummary>> chain(std::uint64_t from, std::uint64_t to) override;
  ApiResult<Timestamp> now() override;

 private:
  std::shared_ptr<Backend> backend_;
};

// Runs the simulator until it settles after every mutation, so calls behave
// synchronously.
class SimBackend final : public Backend {
 public:
  explicit SimBackend(net::World& world, std::uint64_t settle_ticks = 400);
  Timestamp now() override;
  std::shared_ptr<const ledger::LedgerState> snapshot() override;
  void submit(const core::Transaction& tx) override;
  std::optional<Expected<Bytes, storage::RedeemError>> redeem(const LinkToken& token,
                                                              const Nonce& nonce,
                                                              decision::Operation op) override;

 private:
  net::World& world_;
  std::uint64_t settle_ticks_;
};

// Fronts a live validator node; redemptions are proxied to the storage peer.
class LiveBackend final : public Backend {
 public:
  LiveBackend(net::LiveRunner& host, std::string storage_name,
              std::chrono::milliseconds timeout = std::chrono::seconds(5));
  ~LiveBackend() override;
  Timestamp now() override;
  std::shared_ptr<const ledger::LedgerState> snapshot() override;
  void submit(const core::Transaction& tx) override;
  std::optional<Expected<Bytes, storage::RedeemError>> redeem(const LinkToken& token,
                                                              const Nonce& nonce,
                                                              decision::Operation op) override;

 private:
  struct Waiting;
  net::LiveRunner& host_;
  std::string storage_name_;
  std::chrono::milliseconds timeout_;
  std::shared_ptr<Waiting> waiting_;
};

std::string to_text(const BlockSummary& b);

}  // namespace dlacb::service
