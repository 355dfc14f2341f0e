#include "glidernav/dockserver.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "glidernav/error.hpp"
#include "text_util.hpp"

namespace fs = std::filesystem;

namespace glidernav {

namespace {

constexpr std::size_t kMaxLine = 4096;

std::string errno_text() { return std::strerror(errno); }

void set_timeouts(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

// Blocking socket I/O shared by the client and the server sessions. Returns
// false on EOF or error.
bool write_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

bool fill(int fd, std::string& buffer) {
  char chunk[8192];
  for (;;) {
    ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    buffer.append(chunk, static_cast<std::size_t>(n));
    return true;
  }
}

// Line without the trailing LF (and CR). nullopt on EOF, error or overlong line.
std::optional<std::string> take_line(int fd, std::string& buffer) {
  for (;;) {
    auto nl = buffer.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (buffer.size() > kMaxLine || !fill(fd, buffer)) return std::nullopt;
  }
}

std::optional<std::string> take_exact(int fd, std::string& buffer, std::size_t n) {
  while (buffer.size() < n) {
    if (!fill(fd, buffer)) return std::nullopt;
  }
  std::string out = buffer.substr(0, n);
  buffer.erase(0, n);
  return out;
}

// Splits "<glider>/<name>".
std::optional<std::pair<std::string, std::string>> split_path(std::string_view path) {
  auto slash = path.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  std::string glider(path.substr(0, slash));
  std::string name(path.substr(slash + 1));
  if (!is_safe_name(glider) || !is_safe_name(name)) return std::nullopt;
  return std::make_pair(glider, name);
}

}  // namespace

std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint) {
  auto colon = endpoint.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ParseError(fmt::format("endpoint '{}' is not host:port", endpoint));
  }
  std::string host(endpoint.substr(0, colon));
  long long port = 0;
  try {
    port = detail::to_int(endpoint.substr(colon + 1));
  } catch (const ParseError&) {
    throw ParseError(fmt::format("endpoint '{}' has a bad port", endpoint));
  }
  if (port < 0 || port > 65535) throw ParseError(fmt::format("endpoint '{}' port out of range", endpoint));
  return {host, static_cast<std::uint16_t>(port)};
}

bool is_safe_name(std::string_view name) {
  if (name.empty() || name.front() == '.' || name.size() > 255) return false;
  return std::none_of(name.begin(), name.end(), [](char c) {
    return c == '/' || c == '\\' || static_cast<unsigned char>(c) <= ' ' || c == 0x7f;
  });
}

// ---------------------------------------------------------------- client

TcpDockserverClient::TcpDockserverClient(const std::string& endpoint, const std::string& token,
                                         std::chrono::milliseconds timeout) {
  auto [host, port] = parse_endpoint(endpoint);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw ConnectionError(fmt::format("resolve {}: {}", endpoint, ::gai_strerror(rc)));
  }
  std::string last_error = "no address";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_error = errno_text();
      continue;
    }
    set_timeouts(fd, timeout);
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    last_error = errno_text();
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw ConnectionError(fmt::format("connect {}: {}", endpoint, last_error));
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

  send_all("AUTH " + token + "\n");
  std::string reply = read_line();
  if (reply == "ERR auth") {
    ::close(fd_);
    fd_ = -1;
    throw AuthError("dockserver rejected the token");
  }
  if (reply != "OK") {
    ::close(fd_);
    fd_ = -1;
    throw ProtocolError("unexpected AUTH reply: " + reply);
  }
}

TcpDockserverClient::~TcpDockserverClient() {
  if (fd_ >= 0) {
    write_all(fd_, "QUIT\n");
    ::close(fd_);
  }
}

void TcpDockserverClient::quit() {
  if (fd_ < 0) return;
  write_all(fd_, "QUIT\n");
  ::close(fd_);
  fd_ = -1;
}

void TcpDockserverClient::send_all(std::string_view bytes) {
  if (fd_ < 0 || !write_all(fd_, bytes)) throw ConnectionError("send failed: connection lost");
}

std::string TcpDockserverClient::read_line() {
  if (fd_ < 0) throw ConnectionError("not connected");
  auto line = take_line(fd_, buffer_);
  if (!line) throw ConnectionError("connection lost while reading reply");
  return *line;
}

std::string TcpDockserverClient::read_exact(std::size_t n) {
  if (fd_ < 0) throw ConnectionError("not connected");
  auto bytes = take_exact(fd_, buffer_, n);
  if (!bytes) throw ConnectionError("connection lost while reading payload");
  return *bytes;
}

namespace {

// "OK <n>" -> n; ERR replies become ProtocolError.
std::size_t ok_count(const std::string& reply, std::string_view what) {
  auto parts = detail::split_ws(reply);
  if (parts.size() == 2 && parts[0] == "OK") {
    try {
      return detail::to_size(parts[1]);
    } catch (const ParseError&) {
    }
  }
  throw ProtocolError(fmt::format("{}: {}", what, reply));
}

}  // namespace

std::vector<RemoteFile> TcpDockserverClient::list(const std::string& glider) {
  send_all("LIST " + glider + "\n");
  std::size_t n = ok_count(read_line(), "LIST " + glider);
  std::vector<RemoteFile> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::string line = read_line();
    auto parts = detail::split_ws(line);
    if (parts.size() != 3) throw ProtocolError("bad LIST entry: " + line);
    try {
      out.push_back({std::string(parts[0]), detail::to_size(parts[1]), detail::to_int(parts[2])});
    } catch (const ParseError&) {
      throw ProtocolError("bad LIST entry: " + line);
    }
  }
  return out;
}

std::string TcpDockserverClient::get(const std::string& glider, const std::string& name) {
  send_all("GET " + glider + "/" + name + "\n");
  std::size_t n = ok_count(read_line(), "GET " + glider + "/" + name);
  return read_exact(n);
}

void TcpDockserverClient::put(const std::string& glider, const std::string& name, std::string_view bytes) {
  std::string head = fmt::format("PUT {}/{} {}\n", glider, name, bytes.size());
  send_all(head);
  send_all(bytes);
  std::string reply = read_line();
  if (reply != "OK") throw ProtocolError(fmt::format("PUT {}/{}: {}", glider, name, reply));
}

// ---------------------------------------------------------------- latency

LatencyLink::LatencyLink(std::unique_ptr<DockserverLink> inner, Clock& clock, std::function<double()> latency_s)
    : inner_(std::move(inner)), clock_(clock), latency_(std::move(latency_s)) {}

std::vector<RemoteFile> LatencyLink::list(const std::string& glider) {
  auto out = inner_->list(glider);
  clock_.sleep_for(latency_());
  return out;
}

std::string LatencyLink::get(const std::string& glider, const std::string& name) {
  auto out = inner_->get(glider, name);
  clock_.sleep_for(latency_());
  return out;
}

void LatencyLink::put(const std::string& glider, const std::string& name, std::string_view bytes) {
  inner_->put(glider, name, bytes);
  clock_.sleep_for(latency_());
}

// ---------------------------------------------------------------- server

MockDockserver::MockDockserver(MockServerOptions options) : options_(std::move(options)) {
  std::error_code ec;
  if (!fs::is_directory(options_.root, ec)) throw Error("dockserver root is not a directory: " + options_.root);
  auto [host, port] = parse_endpoint(options_.endpoint);

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  std::string service = std::to_string(port);
  const char* node = host.empty() || host == "*" ? nullptr : host.c_str();
  if (int rc = ::getaddrinfo(node, service.c_str(), &hints, &res); rc != 0) {
    throw Error(fmt::format("resolve {}: {}", options_.endpoint, ::gai_strerror(rc)));
  }
  listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (listen_fd_ < 0) {
    ::freeaddrinfo(res);
    throw Error("socket: " + errno_text());
  }
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(listen_fd_, res->ai_addr, res->ai_addrlen) != 0 || ::listen(listen_fd_, 64) != 0) {
    std::string why = errno_text();
    ::freeaddrinfo(res);
    ::close(listen_fd_);
    throw Error(fmt::format("bind {}: {}", options_.endpoint, why));
  }
  ::freeaddrinfo(res);

  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

MockDockserver::~MockDockserver() { stop(); }

std::string MockDockserver::endpoint() const {
  auto [host, port] = parse_endpoint(options_.endpoint);
  if (host.empty() || host == "*" || host == "0.0.0.0") host = "127.0.0.1";
  return fmt::format("{}:{}", host, port_);
}

void MockDockserver::stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  std::vector<std::thread> sessions;
  {
    std::lock_guard lock(mu_);
    for (int fd : session_fds_) ::shutdown(fd, SHUT_RDWR);
    sessions.swap(sessions_);
  }
  for (auto& t : sessions) t.join();
}

void MockDockserver::accept_loop() {
  while (!stopping_.load()) {
    pollfd p{listen_fd_, POLLIN, 0};
    int rc = ::poll(&p, 1, 50);
    if (rc <= 0) continue;
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    ++sessions_accepted_;
    std::lock_guard lock(mu_);
    if (stopping_.load()) {
      ::close(fd);
      break;
    }
    session_fds_.insert(fd);
    sessions_.emplace_back([this, fd] {
      serve(fd);
      std::lock_guard inner(mu_);
      session_fds_.erase(fd);
      ::close(fd);
    });
  }
}

void MockDockserver::serve(int fd) {
  std::string buffer;
  bool authed = false;
  auto reply = [&](std::string_view text) {
    if (options_.latency.count() > 0) std::this_thread::sleep_for(options_.latency);
    return write_all(fd, text);
  };
  const fs::path root(options_.root);

  for (;;) {
    auto line = take_line(fd, buffer);
    if (!line) return;
    auto parts = detail::split_ws(*line);
    if (parts.empty()) {
      if (!reply("ERR empty\n")) return;
      continue;
    }
    std::string_view cmd = parts[0];

    if (cmd == "QUIT") return;
    if (cmd == "AUTH") {
      if (parts.size() == 2 && parts[1] == options_.token) {
        authed = true;
        if (!reply("OK\n")) return;
        continue;
      }
      reply("ERR auth\n");
      return;
    }
    if (!authed) {
      reply("ERR auth\n");
      return;
    }

    if (cmd == "LIST") {
      if (parts.size() != 2 || !is_safe_name(parts[1])) {
        if (!reply("ERR usage\n")) return;
        continue;
      }
      fs::path dir = root / std::string(parts[1]);
      std::error_code ec;
      if (!fs::is_directory(dir, ec)) {
        if (!reply("ERR notfound\n")) return;
        continue;
      }
      std::vector<RemoteFile> files;
      for (const auto& entry : fs::directory_iterator(dir, ec)) {
        std::string name = entry.path().filename().string();
        if (!is_safe_name(name)) continue;
        struct stat st {};
        if (::stat(entry.path().c_str(), &st) != 0 || !S_ISREG(st.st_mode)) continue;
        files.push_back({name, static_cast<std::uint64_t>(st.st_size), static_cast<long long>(st.st_mtime)});
      }
      std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
      std::string out = fmt::format("OK {}\n", files.size());
      for (const auto& f : files) out += fmt::format("{} {} {}\n", f.name, f.size, f.mtime);
      if (!reply(out)) return;
      continue;
    }

    if (cmd == "GET") {
      auto path = parts.size() == 2 ? split_path(parts[1]) : std::nullopt;
      if (!path) {
        if (!reply("ERR usage\n")) return;
        continue;
      }
      std::ifstream in(root / path->first / path->second, std::ios::binary);
      if (!in) {
        if (!reply("ERR notfound\n")) return;
        continue;
      }
      std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      if (!reply(fmt::format("OK {}\n", bytes.size()) + bytes)) return;
      continue;
    }

    if (cmd == "PUT") {
      auto path = parts.size() == 3 ? split_path(parts[1]) : std::nullopt;
      std::size_t size = 0;
      bool size_ok = false;
      if (parts.size() == 3) {
        try {
          size = detail::to_size(parts[2]);
          size_ok = size <= options_.max_put_bytes;
        } catch (const ParseError&) {
        }
      }
      if (!size_ok) {
        // Payload length unknown or refused; the stream cannot be resynchronised.
        reply("ERR size\n");
        return;
      }
      auto payload = take_exact(fd, buffer, size);
      if (!payload) return;
      if (!path) {
        if (!reply("ERR usage\n")) return;
        continue;
      }
      fs::path dir = root / path->first;
      std::error_code ec;
      if (!fs::is_directory(dir, ec)) {
        if (!reply("ERR notfound\n")) return;
        continue;
      }
      fs::path tmp = dir / fmt::format(".{}.part-{}", path->second, std::random_device{}());
      bool ok = false;
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(payload->data(), static_cast<std::streamsize>(payload->size()));
        ok = static_cast<bool>(out);
      }
      if (ok) {
        fs::rename(tmp, dir / path->second, ec);
        ok = !ec;
      }
      if (!ok) {
        fs::remove(tmp, ec);
        if (!reply("ERR io\n")) return;
        continue;
      }
      if (!reply("OK\n")) return;
      continue;
    }

    if (!reply("ERR unknown\n")) return;
  }
}

}  // namespace glidernav
