#include "consensus/config.hpp"

#include "consensus/ingest.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>

namespace consensus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void set_listen(ServiceConfig& cfg, const std::string& value, const std::string& key) {
  const auto colon = value.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw ConfigError(fmt::format("{}: expected host:port, got '{}'", key, value));
  }
  unsigned port = 0;
  const std::string digits = value.substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || port > 65535) {
    throw ConfigError(fmt::format("{}: invalid port '{}'", key, digits));
  }
  cfg.host = value.substr(0, colon);
  cfg.port = static_cast<std::uint16_t>(port);
}

void set_timeout(ServiceConfig& cfg, long long seconds, const std::string& key) {
  if (seconds <= 0) throw ConfigError(fmt::format("{}: timeout must be positive", key));
  cfg.idle_timeout = std::chrono::seconds(seconds);
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

}  // namespace

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

ServiceConfig parse_config(const std::string& text, const std::string& base_dir, const EnvLookup& env) {
  ServiceConfig cfg;
  json j;
  try {
    j = text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  const auto str = [](const json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError(fmt::format("{}: expected a string", key));
    return v.get<std::string>();
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "listen") {
      set_listen(cfg, str(*it, key), key);
    } else if (key == "data_dir") {
      cfg.data_dir = resolve(str(*it, key), base_dir);
    } else if (key == "session_idle_timeout_s") {
      if (!it->is_number_integer()) throw ConfigError(fmt::format("{}: expected an integer", key));
      set_timeout(cfg, it->get<long long>(), key);
    } else if (key == "baseline") {
      cfg.baseline_path = resolve(str(*it, key), base_dir);
    } else if (key == "proposals") {
      cfg.proposals_path = resolve(str(*it, key), base_dir);
    } else {
      throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
  }

  if (auto v = env("CONSENSUS_LISTEN")) set_listen(cfg, *v, "CONSENSUS_LISTEN");
  if (auto v = env("CONSENSUS_DATA_DIR")) cfg.data_dir = *v;
  if (auto v = env("CONSENSUS_SESSION_IDLE_TIMEOUT")) {
    long long seconds = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), seconds);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      throw ConfigError(fmt::format("CONSENSUS_SESSION_IDLE_TIMEOUT: invalid value '{}'", *v));
    }
    set_timeout(cfg, seconds, "CONSENSUS_SESSION_IDLE_TIMEOUT");
  }
  if (auto v = env("CONSENSUS_BASELINE")) cfg.baseline_path = *v;
  if (auto v = env("CONSENSUS_PROPOSALS")) cfg.proposals_path = *v;
  return cfg;
}

ServiceConfig load_config(const std::string& path, const EnvLookup& env) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, fs::path(path).parent_path().string(), env);
}

}  // namespace consensus
