#include "dlacb/net/live.hpp"

namespace dlacb::net {

class LiveRunner::Context final : public NodeContext {
 public:
  explicit Context(LiveRunner& r) : r_(r) {}
  Timestamp now() const override { return r_.genesis_time_ + r_.ticks_done_; }
  void send(const std::string& to, const Message& m) override {
    for (const auto& p : r_.peers_) {
      if (p.name == to) {
        r_.transport_.send(p.port, Frame{r_.node_->name(), m});
        return;
      }
    }
  }
  std::vector<std::string> peers(Role role) const override {
    std::vector<std::string> out;
    for (const auto& p : r_.peers_) {
      if (p.role == role) out.push_back(p.name);
    }
    return out;
  }
  void trace(std::string_view event, std::string_view ref) override {
    auto line = std::to_string(now()) + " " + r_.node_->name() + " " + std::string(event) + " " +
                std::string(ref.empty() ? "-" : ref);
    if (r_.sink_) r_.sink_(line);
    r_.trace_.push_back(std::move(line));
  }
  bool retransmit() const override { return r_.retransmit_; }

 private:
  LiveRunner& r_;
};

LiveRunner::LiveRunner(std::unique_ptr<Node> node, std::uint16_t port, Timestamp genesis_time,
                       std::chrono::milliseconds tick, bool retransmit)
    : node_(std::move(node)),
      genesis_time_(genesis_time),
      tick_(tick),
      retransmit_(retransmit),
      ctx_(std::make_unique<Context>(*this)),
      transport_(port, [this](Frame f) {
        {
          std::lock_guard lock(mailbox_mu_);
          mailbox_.push_back(std::move(f));
        }
        cv_.notify_one();
      }) {}

LiveRunner::~LiveRunner() { stop(); }

void LiveRunner::set_peers(std::vector<PeerAddress> peers) {
  std::lock_guard lock(mu_);
  peers_ = std::move(peers);
}

void LiveRunner::set_trace_sink(TraceSink sink) {
  std::lock_guard lock(mu_);
  sink_ = std::move(sink);
}

void LiveRunner::set_listener(std::function<void(const Frame&)> listener) {
  std::lock_guard lock(mu_);
  listener_ = std::move(listener);
}

void LiveRunner::set_clock_origin(std::chrono::system_clock::time_point tick_zero) {
  std::lock_guard lock(mu_);
  origin_ = tick_zero;
}

void LiveRunner::start() {
  std::lock_guard lock(mu_);
  if (running_) return;
  running_ = true;
  stopping_ = false;
  started_ = std::chrono::steady_clock::now();
  if (origin_) {
    auto elapsed = std::chrono::system_clock::now() - *origin_;
    if (elapsed.count() > 0) {
      ticks_done_ = static_cast<std::uint64_t>(elapsed / tick_);
      started_ -= std::chrono::duration_cast<std::chrono::steady_clock::duration>(elapsed);
    }
  }
  worker_ = std::thread([this] { run(); });
}

void LiveRunner::stop() {
  {
    std::lock_guard lock(mu_);
    if (!running_) {
      transport_.stop();
      return;
    }
    running_ = false;
  }
  {
    std::lock_guard lock(mailbox_mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
  transport_.stop();
}

void LiveRunner::with_node(const std::function<void(Node&, NodeContext&)>& f) {
  std::lock_guard lock(mu_);
  f(*node_, *ctx_);
}

std::vector<std::string> LiveRunner::trace() const {
  std::lock_guard lock(mu_);
  return trace_;
}

void LiveRunner::run() {
  for (;;) {
    std::deque<Frame> batch;
    {
      std::unique_lock lock(mailbox_mu_);
      auto next_tick = started_ + tick_ * (ticks_done_ + 1);
      cv_.wait_until(lock, next_tick, [&] { return stopping_ || !mailbox_.empty(); });
      if (stopping_) return;
      batch.swap(mailbox_);
    }
    std::lock_guard lock(mu_);
    for (auto& f : batch) {
      if (listener_) listener_(f);
      node_->on_message(*ctx_, f.from, f.message);
    }
    while (std::chrono::steady_clock::now() >= started_ + tick_ * (ticks_done_ + 1)) {
      ++ticks_done_;
      node_->on_tick(*ctx_);
    }
  }
}

}  // namespace dlacb::net
