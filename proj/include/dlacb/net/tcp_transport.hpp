#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>

#include "dlacb/net/messages.hpp"

namespace dlacb::net {

struct Frame {
  std::string from;
  Message message;
};

Bytes encode_frame(const Frame& f);
Frame decode_frame(ByteView data);  // throws FormatError

inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

// Loopback transport: each frame is a u32 big-endian length followed by the
// encoded frame. One short-lived connection per send.
class TcpTransport {
 public:
  using Handler = std::function<void(Frame)>;

  // Port 0 picks an ephemeral port. Throws Error if binding fails.
  TcpTransport(std::uint16_t port, Handler handler);
  ~TcpTransport();
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  std::uint16_t port() const { return port_; }
  // False if the peer is unreachable.
  bool send(std::uint16_t port, const Frame& frame);
  void stop();
  std::uint64_t malformed_frames() const { return malformed_; }

 private:
  void accept_loop();
  void serve(int fd);

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  Handler handler_;
  std::atomic<bool> running_{true};
  std::atomic<std::uint64_t> malformed_{0};
  std::thread acceptor_;
};

}  // namespace dlacb::net
