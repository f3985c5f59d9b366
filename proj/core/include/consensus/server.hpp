#pragma once

#include "consensus/config.hpp"
#include "consensus/event_store.hpp"
#include "consensus/session.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace consensus {

/// Collaboration service over TCP, one wire message per line.
///
/// A connection binds to (session, user) with its first message, which
/// must be Hello; the reply is a Snapshot, also on reconnect. Events within
/// a session are applied, logged and broadcast under one lock, so every
/// client sees them in log order. Sessions are created on first Hello.
class Server {
 public:
  Server(ServiceConfig config, Baseline baseline, std::vector<Proposal> pool);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Catalog from the data directory if present, else from the configured
  /// files (then snapshotted into the data directory).
  static std::unique_ptr<Server> from_config(const ServiceConfig& config);

  /// Binds and listens; throws std::system_error (e.g. port in use).
  void start();
  std::uint16_t port() const { return port_; }
  std::string address() const;

  /// Serves until stop(). Call after start().
  void run();
  /// Thread-safe and idempotent.
  void stop();

  /// Canonical state of a live or stored session, for inspection.
  std::optional<std::string> session_state(const std::string& id);
  std::size_t live_sessions() const;

 private:
  struct Connection;
  struct LiveSession;

  void serve_connection(const std::shared_ptr<Connection>& conn);
  void handle_line(const std::shared_ptr<Connection>& conn, const std::string& line);
  std::shared_ptr<LiveSession> acquire(const std::string& id);
  void reap_idle();
  void detach(const std::shared_ptr<Connection>& conn);

  ServiceConfig config_;
  Baseline baseline_;
  std::vector<Proposal> pool_;
  EventStore store_;

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};

  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions_;

  std::mutex connections_mutex_;
  std::vector<std::pair<std::shared_ptr<Connection>, std::thread>> connections_;
};

}  // namespace consensus
