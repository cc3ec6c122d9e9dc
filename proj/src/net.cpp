// SPDX-License-Identifier: Apache-2.0
#include "symscene/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstdio>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <list>
#include <mutex>
#include <thread>
#include <utility>

#include "symscene/error.hpp"
#include "symscene/wire.hpp"

namespace symscene {

namespace {

void log_line(const std::string& msg) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::clog << "[symscene] " << msg << '\n';
}

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void shutdown() const {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

// Returns false on orderly EOF before any byte; throws on EOF mid-read.
bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, buf + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw std::runtime_error("connection closed mid-message");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(errno_text("recv"));
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

void discard_exact(int fd, std::size_t n) {
  std::uint8_t buf[4096];
  while (n > 0) {
    const std::size_t chunk = std::min(n, sizeof buf);
    if (!read_exact(fd, buf, chunk)) throw std::runtime_error("connection closed mid-frame");
    n -= chunk;
  }
}

void write_all(int fd, const std::uint8_t* buf, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, buf, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(errno_text("send"));
    }
    buf += w;
    n -= static_cast<std::size_t>(w);
  }
}

std::array<std::uint8_t, 4> le32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
}

std::uint32_t from_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

addrinfo* resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  const int rc = ::getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) {
    throw std::runtime_error("cannot resolve '" + ep.host + "': " + ::gai_strerror(rc));
  }
  return res;
}

}  // namespace

std::string_view to_string(FrameStatus status) {
  switch (status) {
    case FrameStatus::kAccepted:
      return "accepted";
    case FrameStatus::kTierRejected:
      return "tier-rejected";
    case FrameStatus::kMalformed:
      return "malformed";
    case FrameStatus::kTooLarge:
      return "too-large";
  }
  return "unknown";
}

void validate(const ServerPolicy& policy) {
  if (policy.max_objects == 0) throw ConfigError("max_objects must be positive");
  if (policy.max_frame_bytes < kMinFrameSize) {
    throw ConfigError("max_frame_bytes must be at least " + std::to_string(kMinFrameSize));
  }
}

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw InvalidInput("address '" + text + "' lacks ':port'");
  Endpoint ep;
  ep.host = text.substr(0, colon);
  if (ep.host.size() >= 2 && ep.host.front() == '[' && ep.host.back() == ']') {
    ep.host = ep.host.substr(1, ep.host.size() - 2);
  }
  const std::string port = text.substr(colon + 1);
  char* end = nullptr;
  const long p = std::strtol(port.c_str(), &end, 10);
  if (port.empty() || *end != '\0' || p < 0 || p > 65535) {
    throw InvalidInput("bad port in address '" + text + "'");
  }
  ep.port = static_cast<std::uint16_t>(p);
  return ep;
}

FrameSink make_recording_sink(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto counter = std::make_shared<std::atomic<std::size_t>>(0);
  return [dir, counter](const SceneEncoding&, std::span<const std::uint8_t> bytes) {
    const std::size_t n = counter->fetch_add(1) + 1;
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.symv", n);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
  };
}

struct Server::Impl {
  struct Connection {
    Socket socket;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  Endpoint bind;
  ServerPolicy policy;
  FrameSink sink;

  Socket listener;
  std::uint16_t bound_port = 0;
  std::thread accept_thread;

  mutable std::mutex mu;
  std::condition_variable stopped_cv;
  bool stopping = false;
  bool stopped = false;
  std::list<Connection> connections;
  ServerStats stats;

  void count(FrameStatus s) {
    std::lock_guard lock(mu);
    switch (s) {
      case FrameStatus::kAccepted:
        ++stats.accepted;
        break;
      case FrameStatus::kTierRejected:
        ++stats.tier_rejected;
        break;
      case FrameStatus::kMalformed:
        ++stats.malformed;
        break;
      case FrameStatus::kTooLarge:
        ++stats.too_large;
        break;
    }
  }

  void reply(int fd, FrameStatus s, std::uint32_t num_objects = 0) {
    count(s);
    std::uint8_t msg[5] = {static_cast<std::uint8_t>(s)};
    std::size_t len = 1;
    if (s == FrameStatus::kAccepted) {
      const auto le = le32(num_objects);
      std::copy(le.begin(), le.end(), msg + 1);
      len = 5;
    }
    write_all(fd, msg, len);
  }

  void handle_frame(int fd, std::uint32_t length) {
    if (length > policy.max_frame_bytes) {
      reply(fd, FrameStatus::kTooLarge);
      discard_exact(fd, length);
      return;
    }
    std::vector<std::uint8_t> frame(length);
    if (length > 0 && !read_exact(fd, frame.data(), length)) {
      throw std::runtime_error("connection closed mid-frame");
    }
    SceneEncoding enc;
    try {
      enc = decode_frame(frame);
    } catch (const FrameError& e) {
      log_line(std::string("malformed frame: ") + e.what());
      reply(fd, FrameStatus::kMalformed);
      return;
    }
    if (enc.tier < policy.minimum_tier) {
      reply(fd, FrameStatus::kTierRejected);
      return;
    }
    if (enc.num_objects() > policy.max_objects) {
      reply(fd, FrameStatus::kTooLarge);
      return;
    }
    sink(enc, frame);
    reply(fd, FrameStatus::kAccepted, static_cast<std::uint32_t>(enc.num_objects()));
  }

  void serve_connection(Connection& conn) {
    const int fd = conn.socket.fd();
    try {
      std::uint8_t prefix[4];
      while (read_exact(fd, prefix, sizeof prefix)) handle_frame(fd, from_le32(prefix));
    } catch (const std::exception& e) {
      bool quiet;
      {
        std::lock_guard lock(mu);
        quiet = stopping;
      }
      if (!quiet) log_line(std::string("connection dropped: ") + e.what());
    }
    conn.socket.shutdown();
    conn.done = true;
  }

  // Joins finished connection threads. Caller holds mu.
  void reap() {
    for (auto it = connections.begin(); it != connections.end();) {
      if (it->done) {
        it->thread.join();
        it = connections.erase(it);
      } else {
        ++it;
      }
    }
  }

  void accept_loop() {
    for (;;) {
      const int fd = ::accept(listener.fd(), nullptr, nullptr);
      std::lock_guard lock(mu);
      if (stopping) {
        if (fd >= 0) ::close(fd);
        return;
      }
      if (fd < 0) {
        if (errno == EINTR || errno == ECONNABORTED) continue;
        log_line(errno_text("accept"));
        return;
      }
      reap();
      ++stats.connections;
      auto& conn = connections.emplace_back();
      conn.socket = Socket(fd);
      conn.thread = std::thread([this, &conn] { serve_connection(conn); });
    }
  }
};

Server::Server(Endpoint bind, ServerPolicy policy, FrameSink sink) : impl_(std::make_unique<Impl>()) {
  validate(policy);
  if (!sink) throw InvalidInput("server needs a frame sink");
  impl_->bind = std::move(bind);
  impl_->policy = policy;
  impl_->sink = std::move(sink);
}

Server::~Server() { stop(); }

void Server::start() {
  addrinfo* res = resolve(impl_->bind, true);
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
  std::string last_error = "no usable address";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) {
      last_error = errno_text("socket");
      continue;
    }
    const int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) != 0 || ::listen(s.fd(), 64) != 0) {
      last_error = errno_text("bind/listen");
      continue;
    }
    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    impl_->bound_port = ntohs(addr.ss_family == AF_INET6
                                  ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                                  : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    impl_->listener = std::move(s);
    impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
    return;
  }
  throw std::runtime_error("cannot listen on " + impl_->bind.host + ":" +
                           std::to_string(impl_->bind.port) + ": " + last_error);
}

void Server::stop() {
  {
    std::lock_guard lock(impl_->mu);
    if (impl_->stopped) return;
    impl_->stopping = true;
    impl_->listener.shutdown();
    for (auto& c : impl_->connections) c.socket.shutdown();
  }
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  std::list<Impl::Connection> conns;
  {
    std::lock_guard lock(impl_->mu);
    conns.splice(conns.end(), impl_->connections);
  }
  for (auto& c : conns) {
    if (c.thread.joinable()) c.thread.join();
  }
  impl_->listener.close();
  {
    std::lock_guard lock(impl_->mu);
    impl_->stopped = true;
  }
  impl_->stopped_cv.notify_all();
}

void Server::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->stopped_cv.wait(lock, [&] { return impl_->stopped; });
}

std::uint16_t Server::port() const { return impl_->bound_port; }

ServerStats Server::stats() const {
  std::lock_guard lock(impl_->mu);
  return impl_->stats;
}

std::vector<SendResult> send_frame_bytes(const Endpoint& server,
                                         std::span<const std::vector<std::uint8_t>> frames) {
  Socket sock;
  {
    addrinfo* res = nullptr;
    try {
      res = resolve(server, false);
    } catch (const std::exception& e) {
      throw TransportError(e.what(), 0);
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
    std::string last_error = "no usable address";
    for (addrinfo* ai = res; ai && !sock.valid(); ai = ai->ai_next) {
      Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
      if (!s.valid()) continue;
      if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
        sock = std::move(s);
      } else {
        last_error = errno_text("connect");
      }
    }
    if (!sock.valid()) throw TransportError("cannot connect to " + server.host + ":" +
                                                std::to_string(server.port) + ": " + last_error,
                                            0);
    const int one = 1;
    ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }

  std::vector<SendResult> results;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    try {
      if (frames[i].size() > std::numeric_limits<std::uint32_t>::max()) {
        throw std::runtime_error("frame exceeds 4 GiB");
      }
      const auto prefix = le32(static_cast<std::uint32_t>(frames[i].size()));
      write_all(sock.fd(), prefix.data(), prefix.size());
      write_all(sock.fd(), frames[i].data(), frames[i].size());
      std::uint8_t status = 0;
      if (!read_exact(sock.fd(), &status, 1)) throw std::runtime_error("server closed connection");
      if (status > static_cast<std::uint8_t>(FrameStatus::kTooLarge)) {
        throw std::runtime_error("unknown status byte " + std::to_string(status));
      }
      SendResult r{static_cast<FrameStatus>(status), std::nullopt};
      if (r.status == FrameStatus::kAccepted) {
        std::uint8_t echo[4];
        if (!read_exact(sock.fd(), echo, 4)) throw std::runtime_error("server closed connection");
        r.num_objects = from_le32(echo);
      }
      results.push_back(r);
    } catch (const TransportError&) {
      throw;
    } catch (const std::exception& e) {
      throw TransportError(e.what(), i);
    }
  }
  return results;
}

std::vector<SendResult> send(const Endpoint& server, std::span<const SceneEncoding> scenes) {
  std::vector<std::vector<std::uint8_t>> frames;
  frames.reserve(scenes.size());
  for (const auto& s : scenes) frames.push_back(encode_frame(s));
  return send_frame_bytes(server, frames);
}

}  // namespace symscene
