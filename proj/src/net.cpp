#include "qbc/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace qbc::net {

namespace {

std::string os_error(const std::string& what) { return what + ": " + std::strerror(errno); }

struct AddrInfo {
  addrinfo* head = nullptr;
  ~AddrInfo() {
    if (head) freeaddrinfo(head);
  }
};

void resolve(const Endpoint& ep, bool passive, AddrInfo& out) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  const std::string port = std::to_string(ep.port);
  const int rc = getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(), &hints, &out.head);
  if (rc != 0) throw NetError("cannot resolve " + ep.host + ": " + gai_strerror(rc));
}

}  // namespace

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("address must be HOST:PORT");
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  const auto port = text.substr(colon + 1);
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || ptr != port.data() + port.size() || port.empty() || value > 65535) {
    throw std::invalid_argument("bad port in address: " + std::string(text));
  }
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

LineConnection::LineConnection(LineConnection&& o) noexcept : fd_(o.fd_), buffer_(std::move(o.buffer_)) {
  o.fd_ = -1;
}

LineConnection& LineConnection::operator=(LineConnection&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = o.fd_;
    buffer_ = std::move(o.buffer_);
    o.fd_ = -1;
  }
  return *this;
}

LineConnection::~LineConnection() {
  if (fd_ >= 0) ::close(fd_);
}

std::optional<std::string> LineConnection::read_line() {
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (fd_ < 0) return std::nullopt;
    char chunk[4096];
    const ssize_t got = ::recv(fd_, chunk, sizeof chunk, 0);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) return std::nullopt;
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

bool LineConnection::write_all(std::string_view data) {
  while (!data.empty()) {
    const ssize_t sent = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
    if (sent < 0 && errno == EINTR) continue;
    if (sent <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(sent));
  }
  return true;
}

void LineConnection::shutdown() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

LineConnection connect_to(const Endpoint& ep) {
  AddrInfo info;
  resolve(ep, false, info);
  int last_errno = 0;
  for (addrinfo* ai = info.head; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_errno = errno;
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) return LineConnection(fd);
    last_errno = errno;
    ::close(fd);
  }
  errno = last_errno;
  throw NetError(os_error("cannot connect to " + ep.host + ":" + std::to_string(ep.port)));
}

Listener::Listener(const Endpoint& ep) {
  AddrInfo info;
  resolve(ep, true, info);
  for (addrinfo* ai = info.head; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 8) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  if (fd_.load() < 0) throw NetError(os_error("cannot listen on " + ep.host + ":" + std::to_string(ep.port)));

  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd_.load(), reinterpret_cast<sockaddr*>(&addr), &len);
  if (addr.ss_family == AF_INET) {
    port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  } else if (addr.ss_family == AF_INET6) {
    port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }
}

Listener::~Listener() {
  close();
}

std::optional<LineConnection> Listener::accept() {
  for (;;) {
    const int listen_fd = fd_.load();
    if (listen_fd < 0) return std::nullopt;
    const int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd >= 0) return LineConnection(fd);
    if (errno == EINTR) continue;
    return std::nullopt;
  }
}

void Listener::close() noexcept {
  const int fd = fd_.exchange(-1);
  if (fd >= 0) {
    ::shutdown(fd, SHUT_RDWR);
    ::close(fd);
  }
}

}  // namespace qbc::net
