#include "consensus/event_store.hpp"

#include "consensus/csv.hpp"
#include "consensus/errors.hpp"
#include "consensus/ingest.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

namespace consensus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kHeaderFormat = "consensus-session";

void write_whole(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
    out << text;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
  }
  fs::rename(tmp, path);
}

}  // namespace

EventStore::EventStore(fs::path data_dir) : root_(std::move(data_dir)) {
  fs::create_directories(root_ / "sessions");
}

bool EventStore::valid_session_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

fs::path EventStore::log_path(const std::string& id) const {
  if (!valid_session_id(id)) throw ValidationError(fmt::format("invalid session id '{}'", id));
  return root_ / "sessions" / (id + ".log");
}

void EventStore::save_catalog(const Baseline& baseline, const std::vector<Proposal>& proposals) {
  std::lock_guard lock(mutex_);
  if (fs::exists(root_ / "baseline.csv")) return;
  write_whole(root_ / "proposals.csv", render_proposals(proposals, baseline));
  write_whole(root_ / "baseline.csv", render_baseline(baseline));
}

std::optional<std::pair<Baseline, std::vector<Proposal>>> EventStore::load_catalog() const {
  std::lock_guard lock(mutex_);
  const fs::path bpath = root_ / "baseline.csv";
  if (!fs::exists(bpath)) return std::nullopt;
  Baseline b = parse_baseline(read_file(bpath.string()), bpath.string());
  const fs::path ppath = root_ / "proposals.csv";
  std::vector<Proposal> p;
  if (fs::exists(ppath)) p = parse_proposals(read_file(ppath.string()), b, ppath.string());
  return std::pair{std::move(b), std::move(p)};
}

bool EventStore::has_session(const std::string& id) const { return fs::exists(log_path(id)); }

std::vector<std::string> EventStore::session_ids() const {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_ / "sessions")) {
    if (entry.path().extension() == ".log") out.push_back(entry.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void EventStore::create_session(const std::string& id, const SessionOptions& options) {
  const fs::path path = log_path(id);
  std::lock_guard lock(mutex_);
  if (fs::exists(path)) throw StructuralError(fmt::format("session '{}' already exists", id));
  json header = {{"format", kHeaderFormat},
                 {"version", 1},
                 {"session", id},
                 {"max_participants", options.max_participants},
                 {"goal", options.goal ? json(*options.goal) : json(nullptr)},
                 {"participants", options.participants}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << header.dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("cannot create '{}'", path.string()));
}

void EventStore::append(const std::string& id, const WireMessage& event) {
  const fs::path path = log_path(id);
  std::lock_guard lock(mutex_);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  out << encode(event) << '\n';
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("cannot append to '{}'", path.string()));
}

Session EventStore::load_session(const std::string& id, const Baseline& baseline,
                                 const std::vector<Proposal>& pool) const {
  const fs::path path = log_path(id);
  std::string text;
  {
    std::lock_guard lock(mutex_);
    text = read_file(path.string());
  }
  const bool complete = !text.empty() && text.back() == '\n';
  auto lines = csv::lines(text);
  if (!complete && !lines.empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(path.string(), 1, 0, "missing session header");

  SessionOptions opt;
  try {
    const json h = json::parse(lines.front());
    if (h.at("format") != kHeaderFormat || h.at("version") != 1 || h.at("session") != id) {
      throw ParseError(path.string(), 1, 0, "not a session log for this id");
    }
    opt.max_participants = h.at("max_participants").get<std::size_t>();
    if (!h.at("goal").is_null()) opt.goal = h.at("goal").get<Dollars>();
    opt.participants = h.at("participants").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 1, 0, fmt::format("bad session header: {}", e.what()));
  }

  std::vector<WireMessage> events;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    try {
      events.push_back(decode(lines[i]));
    } catch (const ProtocolError& e) {
      throw ParseError(path.string(), i + 1, 0, e.what());
    }
  }
  Session session(id, baseline, pool, std::move(opt));
  session.replay(events);
  return session;
}

}  // namespace consensus
