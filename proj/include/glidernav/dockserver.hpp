#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "glidernav/clock.hpp"

namespace glidernav {

struct RemoteFile {
  std::string name;
  std::uint64_t size = 0;
  long long mtime = 0;  ///< epoch s

  friend bool operator==(const RemoteFile&, const RemoteFile&) = default;
};

/// Authenticated list/fetch/store of per-glider files. Implementations throw
/// ConnectionError on transport trouble and ProtocolError on ERR replies.
class DockserverLink {
 public:
  virtual ~DockserverLink() = default;
  virtual std::vector<RemoteFile> list(const std::string& glider) = 0;
  virtual std::string get(const std::string& glider, const std::string& name) = 0;
  virtual void put(const std::string& glider, const std::string& name, std::string_view bytes) = 0;
};

using LinkFactory = std::function<std::unique_ptr<DockserverLink>()>;

/// Line protocol client:
///   AUTH <token>                  -> OK | ERR auth
///   LIST <glider>                 -> OK <n>, then n lines "<name> <size> <mtime>"
///   GET <glider>/<name>           -> OK <size> + payload | ERR notfound
///   PUT <glider>/<name> <size>    + payload -> OK | ERR
///   QUIT
class TcpDockserverClient final : public DockserverLink {
 public:
  /// Connects and authenticates. Throws AuthError on a rejected token.
  TcpDockserverClient(const std::string& endpoint, const std::string& token,
                      std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~TcpDockserverClient() override;
  TcpDockserverClient(const TcpDockserverClient&) = delete;
  TcpDockserverClient& operator=(const TcpDockserverClient&) = delete;

  std::vector<RemoteFile> list(const std::string& glider) override;
  std::string get(const std::string& glider, const std::string& name) override;
  void put(const std::string& glider, const std::string& name, std::string_view bytes) override;
  void quit();

 private:
  void send_all(std::string_view bytes);
  std::string read_line();
  std::string read_exact(std::size_t n);

  int fd_ = -1;
  std::string buffer_;
};

/// Decorator charging a per-request round-trip latency to a Clock.
class LatencyLink final : public DockserverLink {
 public:
  LatencyLink(std::unique_ptr<DockserverLink> inner, Clock& clock, std::function<double()> latency_s);

  std::vector<RemoteFile> list(const std::string& glider) override;
  std::string get(const std::string& glider, const std::string& name) override;
  void put(const std::string& glider, const std::string& name, std::string_view bytes) override;

 private:
  std::unique_ptr<DockserverLink> inner_;
  Clock& clock_;
  std::function<double()> latency_;
};

struct MockServerOptions {
  std::string root;      ///< directory holding one subdirectory per glider
  std::string endpoint;  ///< "host:port"; port 0 picks a free port
  std::string token;
  std::chrono::milliseconds latency{0};  ///< delay before every reply
  std::uint64_t max_put_bytes = 16u << 20;
};

/// Test double for the shore-side dockserver. PUTs land in a hidden
/// temporary and are renamed into place, so readers never see torn files.
class MockDockserver {
 public:
  /// Binds and starts serving. Throws Error on a bad root or bind failure.
  explicit MockDockserver(MockServerOptions options);
  ~MockDockserver();
  MockDockserver(const MockDockserver&) = delete;
  MockDockserver& operator=(const MockDockserver&) = delete;

  std::uint16_t port() const { return port_; }
  std::string endpoint() const;
  void stop();
  std::size_t sessions_accepted() const { return sessions_accepted_.load(); }

 private:
  void accept_loop();
  void serve(int fd);

  MockServerOptions options_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> sessions_accepted_{0};
  std::thread acceptor_;
  std::mutex mu_;
  std::set<int> session_fds_;
  std::vector<std::thread> sessions_;
};

/// Splits "host:port". Throws ParseError.
std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint);

/// Valid file and glider names: non-empty, no '/', no whitespace, no leading '.'.
bool is_safe_name(std::string_view name);

}  // namespace glidernav
