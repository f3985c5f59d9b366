#include "consensus/server.hpp"

#include "consensus/errors.hpp"
#include "consensus/ingest.hpp"

#include <fmt/format.h>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <system_error>

namespace consensus {

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::system_error(errno, std::generic_category(), what);
}

}  // namespace

struct Server::Connection {
  int fd = -1;
  std::mutex write_mutex;
  std::string session;
  std::string user;
  std::atomic<bool> finished{false};

  bool send(const std::string& line) {
    std::lock_guard lock(write_mutex);
    std::string buf = line;
    buf.push_back('\n');
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = ::send(fd, buf.data() + off, buf.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      off += static_cast<std::size_t>(n);
    }
    return true;
  }
};

struct Server::LiveSession {
  explicit LiveSession(Session s) : session(std::move(s)) {}

  std::mutex mutex;
  Session session;
  std::set<std::shared_ptr<Connection>> subscribers;
  std::chrono::steady_clock::time_point last_activity = std::chrono::steady_clock::now();
};

Server::Server(ServiceConfig config, Baseline baseline, std::vector<Proposal> pool)
    : config_(std::move(config)), baseline_(std::move(baseline)), pool_(std::move(pool)), store_(config_.data_dir) {
  baseline_.validate();
  store_.save_catalog(baseline_, pool_);
}

std::unique_ptr<Server> Server::from_config(const ServiceConfig& config) {
  EventStore probe(config.data_dir);
  if (auto catalog = probe.load_catalog()) {
    return std::make_unique<Server>(config, std::move(catalog->first), std::move(catalog->second));
  }
  if (config.baseline_path.empty()) throw ConfigError("baseline: no baseline file configured and none stored");
  Baseline b = parse_baseline(read_file(config.baseline_path), config.baseline_path);
  std::vector<Proposal> p;
  if (!config.proposals_path.empty()) p = parse_proposals(read_file(config.proposals_path), b, config.proposals_path);
  return std::make_unique<Server>(config, std::move(b), std::move(p));
}

Server::~Server() {
  stop();
  std::vector<std::pair<std::shared_ptr<Connection>, std::thread>> conns;
  {
    std::lock_guard lock(connections_mutex_);
    conns.swap(connections_);
  }
  for (auto& [conn, thread] : conns) {
    ::shutdown(conn->fd, SHUT_RDWR);
    if (thread.joinable()) thread.join();
    ::close(conn->fd);
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Server::start() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE | AI_NUMERICSERV;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(config_.port);
  if (int rc = ::getaddrinfo(config_.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw std::runtime_error(fmt::format("cannot resolve '{}': {}", config_.host, ::gai_strerror(rc)));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);

  listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (listen_fd_ < 0) throw_errno("socket");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(listen_fd_, res->ai_addr, res->ai_addrlen) != 0) {
    throw_errno(fmt::format("bind {}:{}", config_.host, config_.port));
  }
  if (::listen(listen_fd_, 64) != 0) throw_errno("listen");

  sockaddr_storage bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = bound.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port)
                                      : ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
}

std::string Server::address() const { return fmt::format("{}:{}", config_.host, port_); }

void Server::run() {
  if (listen_fd_ < 0) throw std::logic_error("Server::run before start");
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, 100);
    if (rc < 0 && errno != EINTR) throw_errno("poll");
    if (rc > 0 && (p.revents & POLLIN) != 0 && !stopping_) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd >= 0) {
        auto conn = std::make_shared<Connection>();
        conn->fd = fd;
        std::lock_guard lock(connections_mutex_);
        connections_.emplace_back(conn, std::thread([this, conn] { serve_connection(conn); }));
      }
    }
    // Join connections whose peers are gone.
    std::lock_guard lock(connections_mutex_);
    for (auto it = connections_.begin(); it != connections_.end();) {
      if (it->first->finished) {
        it->second.join();
        ::close(it->first->fd);
        it = connections_.erase(it);
      } else {
        ++it;
      }
    }
    reap_idle();
  }
}

void Server::stop() {
  stopping_ = true;
  std::lock_guard lock(connections_mutex_);
  for (auto& [conn, _] : connections_) ::shutdown(conn->fd, SHUT_RDWR);
}

void Server::serve_connection(const std::shared_ptr<Connection>& conn) {
  std::string buffer;
  char chunk[4096];
  while (!stopping_) {
    const ssize_t n = ::recv(conn->fd, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) handle_line(conn, line);
    }
    if (buffer.size() > kMaxLine) {
      conn->send(encode(make_error(conn->session, 0, "line_too_long", "message exceeds 1 MiB")));
      break;
    }
  }
  detach(conn);
  conn->finished = true;
}

void Server::detach(const std::shared_ptr<Connection>& conn) {
  if (conn->session.empty()) return;
  std::shared_ptr<LiveSession> live;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = sessions_.find(conn->session);
    if (it == sessions_.end()) return;
    live = it->second;
  }
  std::lock_guard lock(live->mutex);
  live->subscribers.erase(conn);
  live->last_activity = std::chrono::steady_clock::now();
}

std::shared_ptr<Server::LiveSession> Server::acquire(const std::string& id) {
  std::lock_guard lock(registry_mutex_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  std::shared_ptr<LiveSession> live;
  if (store_.has_session(id)) {
    live = std::make_shared<LiveSession>(store_.load_session(id, baseline_, pool_));
  } else {
    SessionOptions opt;
    store_.create_session(id, opt);
    live = std::make_shared<LiveSession>(Session(id, baseline_, pool_, opt));
  }
  sessions_.emplace(id, live);
  return live;
}

void Server::handle_line(const std::shared_ptr<Connection>& conn, const std::string& line) {
  WireMessage msg;
  try {
    msg = decode(line);
  } catch (const ProtocolError& e) {
    conn->send(encode(make_error(conn->session, 0, "bad_message", e.what())));
    return;
  }
  if (conn->session.empty()) {
    if (msg.kind() != MessageKind::Hello) {
      conn->send(encode(make_error(msg.session, 0, "hello_required", "first message must be Hello")));
      return;
    }
    if (!EventStore::valid_session_id(msg.session)) {
      conn->send(encode(make_error(msg.session, 0, "invalid_session", "session ids are [A-Za-z0-9_-]{1,64}")));
      return;
    }
  } else if (msg.session != conn->session || msg.sender != conn->user) {
    conn->send(encode(make_error(conn->session, 0, "identity_mismatch",
                                 fmt::format("connection is bound to {} in {}", conn->user, conn->session))));
    return;
  }

  std::shared_ptr<LiveSession> live;
  try {
    live = acquire(msg.session);
  } catch (const std::exception& e) {
    conn->send(encode(make_error(msg.session, 0, "session_unavailable", e.what())));
    return;
  }

  std::unique_lock lock(live->mutex);
  live->last_activity = std::chrono::steady_clock::now();
  ApplyOutcome out = live->session.apply(msg);
  if (out.event) {
    try {
      store_.append(msg.session, *out.event);
    } catch (const std::exception& e) {
      // The in-memory session is now ahead of its log; drop it so the next
      // access reloads from disk.
      lock.unlock();
      {
        std::lock_guard reg(registry_mutex_);
        sessions_.erase(msg.session);
      }
      conn->send(encode(make_error(msg.session, 0, "storage_failure", e.what())));
      return;
    }
  }
  if (out.accepted && msg.kind() == MessageKind::Hello) {
    conn->session = msg.session;
    conn->user = msg.sender;
    live->subscribers.insert(conn);
  }
  if (out.reply) conn->send(encode(*out.reply));
  for (const auto& b : out.broadcast) {
    const std::string text = encode(b);
    for (const auto& sub : live->subscribers) sub->send(text);
  }
}

void Server::reap_idle() {
  const auto now = std::chrono::steady_clock::now();
  std::lock_guard lock(registry_mutex_);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock slock(it->second->mutex, std::try_to_lock);
    if (slock.owns_lock() && it->second->subscribers.empty() && now - it->second->last_activity > config_.idle_timeout) {
      slock.unlock();
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::optional<std::string> Server::session_state(const std::string& id) {
  if (!EventStore::valid_session_id(id)) return std::nullopt;
  {
    std::lock_guard lock(registry_mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) {
      std::lock_guard slock(it->second->mutex);
      return it->second->session.canonical_state();
    }
  }
  if (!store_.has_session(id)) return std::nullopt;
  return store_.load_session(id, baseline_, pool_).canonical_state();
}

std::size_t Server::live_sessions() const {
  std::lock_guard lock(registry_mutex_);
  return sessions_.size();
}

}  // namespace consensus
