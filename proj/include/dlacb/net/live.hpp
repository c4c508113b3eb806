#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "dlacb/net/nodes.hpp"
#include "dlacb/net/tcp_transport.hpp"

namespace dlacb::net {

struct PeerAddress {
  std::string name;
  Role role = Role::user;
  std::uint16_t port = 0;
};

// Hosts one node on a local port. Incoming frames land in a mailbox drained
// by the node's own thread, which also drives on_tick once per tick.
class LiveRunner {
 public:
  using TraceSink = std::function<void(const std::string&)>;

  // Logical time is genesis_time plus whole ticks elapsed since start().
  LiveRunner(std::unique_ptr<Node> node, std::uint16_t port, Timestamp genesis_time,
             std::chrono::milliseconds tick = std::chrono::seconds(1), bool retransmit = true);
  ~LiveRunner();

  std::uint16_t port() const { return transport_.port(); }
  void set_peers(std::vector<PeerAddress> peers);
  void set_trace_sink(TraceSink sink);
  // Sees every incoming frame on the node thread before the node does.
  void set_listener(std::function<void(const Frame&)> listener);
  // Count ticks from a shared wall-clock instant instead of from start(), so
  // separately started processes agree on the slot.
  void set_clock_origin(std::chrono::system_clock::time_point tick_zero);
  void start();
  void stop();

  // Runs f on the node thread's data under the node lock.
  void with_node(const std::function<void(Node&, NodeContext&)>& f);
  std::vector<std::string> trace() const;

 private:
  class Context;
  void run();

  std::unique_ptr<Node> node_;
  Timestamp genesis_time_;
  std::chrono::milliseconds tick_;
  bool retransmit_;
  std::unique_ptr<Context> ctx_;
  mutable std::mutex mu_;  // node, peers, trace
  std::mutex mailbox_mu_;
  std::condition_variable cv_;
  std::deque<Frame> mailbox_;
  bool stopping_ = false;
  std::vector<PeerAddress> peers_;
  std::vector<std::string> trace_;
  TraceSink sink_;
  std::function<void(const Frame&)> listener_;
  std::chrono::steady_clock::time_point started_;
  std::uint64_t ticks_done_ = 0;
  std::optional<std::chrono::system_clock::time_point> origin_;
  bool running_ = false;
  std::thread worker_;
  TcpTransport transport_;
};

}  // namespace dlacb::net
