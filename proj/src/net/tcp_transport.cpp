#include "dlacb/net/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "dlacb/util/codec.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::net {
namespace {

bool write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    auto w = ::send(fd, p, n, MSG_NOSIGNAL);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) return false;
    p += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

// 1 on success, 0 on clean EOF before any byte, -1 on error or short read.
int read_all(int fd, std::uint8_t* p, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    auto r = ::recv(fd, p + got, n - got, 0);
    if (r < 0 && errno == EINTR) continue;
    if (r == 0) return got == 0 ? 0 : -1;
    if (r < 0) return -1;
    got += static_cast<std::size_t>(r);
  }
  return 1;
}

sockaddr_in loopback(std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  return addr;
}

}  // namespace

Bytes encode_frame(const Frame& f) {
  Encoder e;
  e.str(f.from).bytes(encode(f.message));
  return std::move(e).take();
}

Frame decode_frame(ByteView data) {
  Decoder d(data);
  Frame f;
  f.from = d.str(256);
  auto body = d.bytes();
  d.finish();
  f.message = decode_message(body);
  return f;
}

TcpTransport::TcpTransport(std::uint16_t port, Handler handler) : handler_(std::move(handler)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  auto addr = loopback(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    auto msg = std::string("bind port ") + std::to_string(port) + ": " + std::strerror(errno);
    ::close(listen_fd_);
    throw Error(msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpTransport::~TcpTransport() { stop(); }

void TcpTransport::stop() {
  if (!running_.exchange(false)) return;
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
}

void TcpTransport::accept_loop() {
  while (running_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 50) <= 0) continue;
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    serve(fd);
    ::close(fd);
  }
}

void TcpTransport::serve(int fd) {
  for (;;) {
    std::uint8_t hdr[4];
    if (read_all(fd, hdr, 4) != 1) return;
    std::uint32_t n = (std::uint32_t{hdr[0]} << 24) | (std::uint32_t{hdr[1]} << 16) |
                      (std::uint32_t{hdr[2]} << 8) | hdr[3];
    if (n > kMaxFrameBytes) {
      ++malformed_;
      return;
    }
    Bytes body(n);
    if (read_all(fd, body.data(), n) != 1) return;
    Frame f;
    try {
      f = decode_frame(body);
    } catch (const Error&) {
      ++malformed_;
      continue;
    }
    handler_(std::move(f));
  }
}

bool TcpTransport::send(std::uint16_t port, const Frame& frame) {
  auto body = encode_frame(frame);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) return false;
  auto addr = loopback(port);
  bool ok = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0;
  if (ok) {
    auto n = static_cast<std::uint32_t>(body.size());
    std::uint8_t hdr[4] = {static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                           static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
    ok = write_all(fd, hdr, 4) && write_all(fd, body.data(), body.size());
  }
  ::close(fd);
  return ok;
}

}  // namespace dlacb::net
