#pragma once

#include "consensus/budget.hpp"
#include "consensus/session.hpp"
#include "consensus/wire.hpp"

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace consensus {

/// On-disk layout under the data directory:
///
///   baseline.csv, proposals.csv   catalog snapshot, written once
///   sessions/<id>.log             header line, then one wire message per
///                                 accepted event, appended and flushed
///
/// Recovery is replay: a session is rebuilt by applying its log to a fresh
/// Session. Thread-safe.
class EventStore {
 public:
  explicit EventStore(std::filesystem::path data_dir);

  const std::filesystem::path& root() const { return root_; }

  /// Session ids are 1-64 characters of [A-Za-z0-9_-].
  static bool valid_session_id(std::string_view id);

  /// Writes the catalog unless one is already stored.
  void save_catalog(const Baseline& baseline, const std::vector<Proposal>& proposals);
  std::optional<std::pair<Baseline, std::vector<Proposal>>> load_catalog() const;

  bool has_session(const std::string& id) const;
  std::vector<std::string> session_ids() const;

  void create_session(const std::string& id, const SessionOptions& options);
  void append(const std::string& id, const WireMessage& event);

  /// Rebuilds a session from its log. A final line cut short by a crash
  /// (no trailing newline) is ignored.
  Session load_session(const std::string& id, const Baseline& baseline, const std::vector<Proposal>& pool) const;

 private:
  std::filesystem::path log_path(const std::string& id) const;

  std::filesystem::path root_;
  mutable std::mutex mutex_;
};

}  // namespace consensus
