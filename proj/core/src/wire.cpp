#include "consensus/wire.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <array>
#include <set>

namespace consensus {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<MessageKind, const char*>, 8> kKindNames{{
    {MessageKind::Hello, "Hello"},
    {MessageKind::Snapshot, "Snapshot"},
    {MessageKind::Adjust, "Adjust"},
    {MessageKind::SelectProposal, "SelectProposal"},
    {MessageKind::DisagreementUpdate, "DisagreementUpdate"},
    {MessageKind::CompareBallot, "CompareBallot"},
    {MessageKind::TrialAdvance, "TrialAdvance"},
    {MessageKind::Error, "Error"},
}};

class Fields {
 public:
  explicit Fields(const json& j) : j_(j) {
    if (!j_.is_object()) throw ProtocolError("expected a JSON object");
  }

  const json& raw(const char* key) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) throw ProtocolError(fmt::format("missing field '{}'", key));
    return *it;
  }

  bool has(const char* key) const { return j_.contains(key); }

  std::string str(const char* key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ProtocolError(fmt::format("field '{}' must be a string", key));
    return v.get<std::string>();
  }

  std::string opt_str(const char* key) { return has(key) ? str(key) : std::string(); }

  std::int64_t integer(const char* key) { return as_integer(raw(key), key); }

  std::uint64_t unsigned_integer(const char* key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned()) throw ProtocolError(fmt::format("field '{}' must be a non-negative integer", key));
    return v.get<std::uint64_t>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) throw ProtocolError(fmt::format("unexpected field '{}'", it.key()));
    }
  }

  static std::int64_t as_integer(const json& v, std::string_view what) {
    if (!v.is_number_integer()) throw ProtocolError(fmt::format("field '{}' must be an integer", what));
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
      throw ProtocolError(fmt::format("field '{}' out of range", what));
    }
    return v.get<std::int64_t>();
  }

  static std::string as_string(const json& v, std::string_view what) {
    if (!v.is_string()) throw ProtocolError(fmt::format("field '{}' must be a string", what));
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::set<std::string> used_;
};

json amounts_to_json(const std::map<CategoryId, Dollars>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = v;
  return out;
}

std::map<CategoryId, Dollars> amounts_from_json(const json& j, std::string_view what) {
  if (!j.is_object()) throw ProtocolError(fmt::format("field '{}' must be an object", what));
  std::map<CategoryId, Dollars> out;
  for (auto it = j.begin(); it != j.end(); ++it) out.emplace(it.key(), Fields::as_integer(*it, it.key()));
  return out;
}

std::vector<std::string> strings_from_json(const json& j, std::string_view what) {
  if (!j.is_array()) throw ProtocolError(fmt::format("field '{}' must be an array", what));
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(Fields::as_string(v, what));
  return out;
}

json proposal_to_json(const Proposal& p) {
  return {{"id", p.id}, {"category", p.category_id}, {"target", p.target}, {"rationale", p.rationale},
          {"author", p.author}};
}

Proposal proposal_from_json(const json& j) {
  Fields f(j);
  Proposal p;
  p.id = f.str("id");
  p.category_id = f.str("category");
  p.target = f.integer("target");
  p.rationale = f.str("rationale");
  p.author = f.str("author");
  f.finish();
  return p;
}

json baseline_to_json(const Baseline& b) {
  json cats = json::array();
  for (const auto& c : b.categories) {
    auto it = b.amounts.find(c.id);
    cats.push_back({{"id", c.id},
                    {"name", c.name},
                    {"kind", to_string(c.kind)},
                    {"description", c.description},
                    {"amount", it == b.amounts.end() ? 0 : it->second}});
  }
  return {{"id", b.id}, {"name", b.name}, {"fiscal_label", b.fiscal_label}, {"categories", cats}};
}

Baseline baseline_from_json(const json& j) {
  Fields f(j);
  Baseline b;
  b.id = f.str("id");
  b.name = f.str("name");
  b.fiscal_label = f.str("fiscal_label");
  const json& cats = f.raw("categories");
  if (!cats.is_array()) throw ProtocolError("field 'categories' must be an array");
  for (const auto& cj : cats) {
    Fields cf(cj);
    Category c;
    c.id = cf.str("id");
    c.name = cf.str("name");
    const std::string kind = cf.str("kind");
    if (kind == "revenue") c.kind = CategoryKind::Revenue;
    else if (kind == "expense") c.kind = CategoryKind::Expense;
    else throw ProtocolError(fmt::format("unknown category kind '{}'", kind));
    c.description = cf.str("description");
    b.amounts[c.id] = cf.integer("amount");
    cf.finish();
    b.categories.push_back(std::move(c));
  }
  f.finish();
  return b;
}

bool six_digit_decimal(std::string_view s) {
  const auto dot = s.find('.');
  if (dot == std::string_view::npos || dot == 0 || s.size() - dot - 1 != 6) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != dot && (s[i] < '0' || s[i] > '9')) return false;
  }
  return true;
}

struct Encoder {
  json& j;

  void operator()(const HelloPayload&) const {}
  void operator()(const AdjustPayload& p) const {
    j["category"] = p.category;
    j["amount"] = p.amount;
    if (!p.budget.empty()) j["budget"] = p.budget;
  }
  void operator()(const SelectProposalPayload& p) const {
    j["category"] = p.category;
    j["proposal"] = p.proposal;
    if (!p.budget.empty()) j["budget"] = p.budget;
  }
  void operator()(const DisagreementPayload& p) const {
    j["raw"] = p.raw;
    j["display"] = p.display;
    j["numerator"] = p.numerator;
    j["denominator"] = p.denominator;
    j["deltas"] = amounts_to_json(p.deltas);
    j["budgets"] = p.budgets;
  }
  void operator()(const CompareBallotPayload& p) const {
    j["budget_a"] = p.budget_a;
    j["budget_b"] = p.budget_b;
    j["choice"] = p.choice;
  }
  void operator()(const TrialAdvancePayload& p) const { j["phase"] = p.phase; }
  void operator()(const ErrorPayload& p) const {
    j["code"] = p.code;
    j["message"] = p.message;
    if (!p.prior.empty()) j["prior"] = p.prior;
  }
  void operator()(const SnapshotPayload& p) const {
    j["baseline"] = baseline_to_json(p.baseline);
    json props = json::array();
    for (const auto& pr : p.proposals) props.push_back(proposal_to_json(pr));
    j["proposals"] = props;
    json usage = json::object();
    for (const auto& [id, n] : p.usage) usage[id] = n;
    j["usage"] = usage;
    j["participants"] = p.participants;
    json budgets = json::array();
    for (const auto& b : p.budgets) {
      json sel = json::object();
      for (const auto& [c, pid] : b.selections) sel[c] = pid;
      budgets.push_back({{"id", b.id}, {"owner", b.owner}, {"amounts", amounts_to_json(b.amounts)}, {"selections", sel}});
    }
    j["budgets"] = budgets;
    j["goal"] = p.goal ? json(*p.goal) : json(nullptr);
  }
};

Payload decode_payload(MessageKind kind, Fields& f) {
  switch (kind) {
    case MessageKind::Hello: return HelloPayload{};
    case MessageKind::Adjust: return AdjustPayload{f.str("category"), f.integer("amount"), f.opt_str("budget")};
    case MessageKind::SelectProposal:
      return SelectProposalPayload{f.str("category"), f.str("proposal"), f.opt_str("budget")};
    case MessageKind::DisagreementUpdate: {
      DisagreementPayload p;
      p.raw = f.str("raw");
      if (!six_digit_decimal(p.raw)) throw ProtocolError(fmt::format("field 'raw' is not a six-digit decimal: '{}'", p.raw));
      p.display = f.str("display");
      if (p.display != p.raw && p.display != kClampedToken) {
        throw ProtocolError(fmt::format("field 'display' must equal 'raw' or '{}'", kClampedToken));
      }
      p.numerator = f.integer("numerator");
      p.denominator = f.integer("denominator");
      p.deltas = amounts_from_json(f.raw("deltas"), "deltas");
      p.budgets = strings_from_json(f.raw("budgets"), "budgets");
      if (p.budgets.size() != 2) throw ProtocolError("field 'budgets' must name exactly two budgets");
      return p;
    }
    case MessageKind::CompareBallot:
      return CompareBallotPayload{f.str("budget_a"), f.str("budget_b"), f.str("choice")};
    case MessageKind::TrialAdvance: return TrialAdvancePayload{f.str("phase")};
    case MessageKind::Error: return ErrorPayload{f.str("code"), f.str("message"), f.opt_str("prior")};
    case MessageKind::Snapshot: {
      SnapshotPayload p;
      p.baseline = baseline_from_json(f.raw("baseline"));
      const json& props = f.raw("proposals");
      if (!props.is_array()) throw ProtocolError("field 'proposals' must be an array");
      for (const auto& pj : props) p.proposals.push_back(proposal_from_json(pj));
      const json& usage = f.raw("usage");
      if (!usage.is_object()) throw ProtocolError("field 'usage' must be an object");
      for (auto it = usage.begin(); it != usage.end(); ++it) {
        if (!it->is_number_unsigned()) throw ProtocolError("usage counts must be non-negative integers");
        p.usage.emplace(it.key(), it->get<std::uint64_t>());
      }
      p.participants = strings_from_json(f.raw("participants"), "participants");
      const json& budgets = f.raw("budgets");
      if (!budgets.is_array()) throw ProtocolError("field 'budgets' must be an array");
      for (const auto& bj : budgets) {
        Fields bf(bj);
        SnapshotBudget b;
        b.id = bf.str("id");
        b.owner = bf.str("owner");
        b.amounts = amounts_from_json(bf.raw("amounts"), "amounts");
        const json& sel = bf.raw("selections");
        if (!sel.is_object()) throw ProtocolError("field 'selections' must be an object");
        for (auto it = sel.begin(); it != sel.end(); ++it) b.selections.emplace(it.key(), Fields::as_string(*it, it.key()));
        bf.finish();
        p.budgets.push_back(std::move(b));
      }
      const json& goal = f.raw("goal");
      if (!goal.is_null()) p.goal = Fields::as_integer(goal, "goal");
      return p;
    }
  }
  throw ProtocolError("unhandled message kind");
}

}  // namespace

const char* to_string(MessageKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<MessageKind> parse_message_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (text == name) return k;
  }
  return std::nullopt;
}

MessageKind WireMessage::kind() const { return static_cast<MessageKind>(payload.index()); }

std::string encode(const WireMessage& m) {
  json j = json::object();
  j["kind"] = to_string(m.kind());
  j["session"] = m.session;
  j["sender"] = m.sender;
  j["seq"] = m.seq;
  std::visit(Encoder{j}, m.payload);
  return j.dump();
}

WireMessage decode(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(fmt::format("malformed JSON: {}", e.what()));
  }
  Fields f(j);
  const std::string kind_text = f.str("kind");
  const auto kind = parse_message_kind(kind_text);
  if (!kind) throw ProtocolError(fmt::format("unknown message kind '{}'", kind_text));
  WireMessage m;
  m.session = f.str("session");
  m.sender = f.str("sender");
  m.seq = f.unsigned_integer("seq");
  m.payload = decode_payload(*kind, f);
  f.finish();
  return m;
}

WireMessage make_hello(std::string session, std::string sender) {
  return {std::move(session), std::move(sender), 0, HelloPayload{}};
}

WireMessage make_adjust(std::string session, std::string sender, CategoryId category, Dollars amount) {
  return {std::move(session), std::move(sender), 0, AdjustPayload{std::move(category), amount, {}}};
}

WireMessage make_select(std::string session, std::string sender, CategoryId category, std::string proposal) {
  return {std::move(session), std::move(sender), 0, SelectProposalPayload{std::move(category), std::move(proposal), {}}};
}

WireMessage make_ballot(std::string session, std::string sender, std::string budget_a, std::string budget_b,
                        std::string choice) {
  return {std::move(session), std::move(sender), 0,
          CompareBallotPayload{std::move(budget_a), std::move(budget_b), std::move(choice)}};
}

WireMessage make_advance(std::string session, std::string sender, std::string phase) {
  return {std::move(session), std::move(sender), 0, TrialAdvancePayload{std::move(phase)}};
}

WireMessage make_error(std::string session, std::uint64_t seq, std::string code, std::string message,
                       std::string prior) {
  return {std::move(session), "server", seq, ErrorPayload{std::move(code), std::move(message), std::move(prior)}};
}

DisagreementPayload to_payload(const DisagreementReport& report, std::string budget_a, std::string budget_b) {
  DisagreementPayload p;
  p.raw = report.raw_text();
  p.display = report.display;
  p.numerator = report.numerator;
  p.denominator = report.denominator;
  p.deltas = report.deltas;
  p.budgets = {std::move(budget_a), std::move(budget_b)};
  return p;
}

}  // namespace consensus
