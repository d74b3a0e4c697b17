#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qbc::net {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// "HOST:PORT"; throws std::invalid_argument.
Endpoint parse_endpoint(std::string_view text);

/// Owns a connected TCP socket and reads newline-terminated lines.
class LineConnection {
 public:
  explicit LineConnection(int fd) noexcept : fd_(fd) {}
  LineConnection(LineConnection&& o) noexcept;
  LineConnection& operator=(LineConnection&& o) noexcept;
  LineConnection(const LineConnection&) = delete;
  LineConnection& operator=(const LineConnection&) = delete;
  ~LineConnection();

  /// Next line without its newline; nullopt on EOF or error.
  std::optional<std::string> read_line();
  /// Writes all of `data`; false if the peer is gone.
  bool write_all(std::string_view data);
  /// Stops both directions; unblocks a reader on another thread.
  void shutdown() noexcept;

 private:
  int fd_ = -1;
  std::string buffer_;
};

/// Connects to `ep`; throws NetError with the OS reason on failure.
LineConnection connect_to(const Endpoint& ep);

class Listener {
 public:
  /// Binds and listens; port 0 picks a free port.
  explicit Listener(const Endpoint& ep);
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  std::uint16_t port() const noexcept { return port_; }
  /// Blocks for the next connection; nullopt once close() was called.
  std::optional<LineConnection> accept();
  void close() noexcept;

 private:
  std::atomic<int> fd_{-1};
  std::uint16_t port_ = 0;
};

}  // namespace qbc::net
