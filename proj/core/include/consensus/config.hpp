#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace consensus {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collaboration service settings.
///
/// File (JSON object, every key optional):
///   listen                  "host:port", port 0 picks a free port
///   data_dir                event logs and the baseline/proposal snapshot
///   session_idle_timeout_s  idle sessions without clients are unloaded
///   baseline                baseline file copied into data_dir on first start
///   proposals               proposal file, likewise
///
/// Environment overrides: CONSENSUS_LISTEN, CONSENSUS_DATA_DIR,
/// CONSENSUS_SESSION_IDLE_TIMEOUT, CONSENSUS_BASELINE, CONSENSUS_PROPOSALS.
struct ServiceConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7400;
  std::string data_dir = "consensus-data";
  std::chrono::seconds idle_timeout{900};
  std::string baseline_path;
  std::string proposals_path;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Process environment.
EnvLookup process_env();

/// Parses config text; relative paths resolve against `base_dir`. Unknown
/// keys and ill-typed values throw ConfigError naming the key.
ServiceConfig parse_config(const std::string& text, const std::string& base_dir, const EnvLookup& env);

ServiceConfig load_config(const std::string& path, const EnvLookup& env = process_env());

}  // namespace consensus
