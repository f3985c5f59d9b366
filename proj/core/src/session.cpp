#include "consensus/session.hpp"

#include "consensus/errors.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>

namespace consensus {

using nlohmann::json;

namespace {

std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

ComparisonBoard::Result ComparisonBoard::record(const UserId& voter, const std::string& budget_a,
                                                const std::string& budget_b, const std::string& choice) {
  if (budget_a == budget_b) throw ValidationError("a comparison needs two different budgets");
  if (choice != budget_a && choice != budget_b) {
    throw ValidationError(fmt::format("choice '{}' is neither '{}' nor '{}'", choice, budget_a, budget_b));
  }
  auto& pair_votes = votes_[ordered(budget_a, budget_b)];
  auto [it, fresh] = pair_votes.emplace(voter, choice);
  if (!fresh) return {false, it->second};
  return {true, {}};
}

std::optional<std::string> ComparisonBoard::prior(const UserId& voter, const std::string& budget_a,
                                                  const std::string& budget_b) const {
  auto pit = votes_.find(ordered(budget_a, budget_b));
  if (pit == votes_.end()) return std::nullopt;
  auto vit = pit->second.find(voter);
  if (vit == pit->second.end()) return std::nullopt;
  return vit->second;
}

PairTally ComparisonBoard::tally(const std::string& budget_a, const std::string& budget_b) const {
  const auto key = ordered(budget_a, budget_b);
  PairTally t{key.first, key.second, 0, 0};
  if (auto pit = votes_.find(key); pit != votes_.end()) {
    for (const auto& [_, choice] : pit->second) {
      if (choice == key.first) ++t.first_votes;
      else ++t.second_votes;
    }
  }
  if (t.second_votes > t.first_votes) {
    std::swap(t.first, t.second);
    std::swap(t.first_votes, t.second_votes);
  }
  return t;
}

std::vector<PairTally> ComparisonBoard::ranking() const {
  std::vector<PairTally> out;
  for (const auto& [key, _] : votes_) out.push_back(tally(key.first, key.second));
  return out;
}

std::size_t ComparisonBoard::ballots() const {
  std::size_t n = 0;
  for (const auto& [_, v] : votes_) n += v.size();
  return n;
}

const char* to_string(ConsensusStatus status) {
  switch (status) {
    case ConsensusStatus::Open: return "open";
    case ConsensusStatus::Consensus: return "consensus";
    case ConsensusStatus::Partial: return "partial";
  }
  return "?";
}

Session::Session(std::string id, Baseline baseline, std::vector<Proposal> pool, SessionOptions options)
    : id_(std::move(id)), baseline_(std::move(baseline)), pool_(std::move(pool)), options_(std::move(options)) {
  baseline_.validate();
  for (const auto& p : pool_) validate_proposal(p, baseline_);
  if (options_.participants.size() > options_.max_participants) {
    throw ValidationError(fmt::format("{} participants exceed the session limit of {}", options_.participants.size(),
                                      options_.max_participants));
  }
  for (const auto& u : options_.participants) {
    if (is_participant(u)) throw ValidationError(fmt::format("participant '{}' listed twice", u));
    add_participant(u);
  }
}

bool Session::is_participant(const UserId& user) const { return budgets_.contains(user); }

void Session::add_participant(const UserId& user) {
  participants_.push_back(user);
  Budget b;
  b.id = fmt::format("{}/{}", id_, user);
  b.baseline_id = baseline_.id;
  b.owner = user;
  budgets_.emplace(user, std::move(b));
}

const Budget& Session::budget_of(const UserId& user) const {
  auto it = budgets_.find(user);
  if (it == budgets_.end()) throw StructuralError(fmt::format("'{}' is not in session '{}'", user, id_));
  return it->second;
}

AmountMap Session::resolved(const UserId& user) const { return resolve_amounts(budget_of(user), baseline_); }

ApplyOutcome Session::reject(std::string code, std::string message, std::string prior) const {
  ApplyOutcome out;
  out.reply = make_error(id_, seq(), std::move(code), std::move(message), std::move(prior));
  return out;
}

std::uint64_t Session::usage(const std::string& proposal_id) const {
  std::uint64_t n = 0;
  for (const auto& [_, b] : budgets_) {
    for (const auto& [__, p] : b.selections) {
      if (p.id == proposal_id) ++n;
    }
  }
  return n;
}

void Session::push_disagreement(ApplyOutcome& out, std::uint64_t at_seq) const {
  if (participants_.size() != 2) return;
  const auto report = *current_disagreement();
  WireMessage update{id_, "server", at_seq,
                     to_payload(report, budget_of(participants_[0]).id, budget_of(participants_[1]).id)};
  out.broadcast.push_back(std::move(update));
}

std::optional<DisagreementReport> Session::current_disagreement() const {
  if (participants_.size() < 2) return std::nullopt;
  return disagreement(resolved(participants_[0]), resolved(participants_[1]));
}

ApplyOutcome Session::apply(const WireMessage& m) {
  if (m.session != id_) return reject("wrong_session", fmt::format("message for session '{}'", m.session));
  const std::uint64_t next = seq() + 1;
  WireMessage event = m;
  event.seq = next;

  ApplyOutcome out;
  const auto commit = [&] {
    log_.push_back(event);
    out.accepted = true;
    out.event = event;
    out.broadcast.insert(out.broadcast.begin(), event);
  };

  if (m.kind() == MessageKind::Hello) {
    if (is_participant(m.sender)) {
      out.accepted = true;
      out.reply = snapshot(m.sender);
      return out;
    }
    if (m.sender.empty() || m.sender == "server") return reject("invalid_sender", "sender name is reserved");
    if (participants_.size() >= options_.max_participants) {
      return reject("session_full", fmt::format("session '{}' is full", id_));
    }
    add_participant(m.sender);
    commit();
    out.reply = snapshot(m.sender);
    return out;
  }

  switch (m.kind()) {
    case MessageKind::Snapshot:
    case MessageKind::DisagreementUpdate:
    case MessageKind::Error:
      return reject("server_only", fmt::format("{} messages are sent by the server", to_string(m.kind())));
    default:
      break;
  }
  if (!is_participant(m.sender)) {
    return reject("not_participant", fmt::format("'{}' is not a participant of '{}'", m.sender, id_));
  }
  Budget& own = budgets_.at(m.sender);

  if (const auto* adj = std::get_if<AdjustPayload>(&m.payload)) {
    if (!adj->budget.empty() && adj->budget != own.id) {
      return reject("not_owner", fmt::format("'{}' may not modify budget '{}'", m.sender, adj->budget));
    }
    const Category* cat = baseline_.find(adj->category);
    if (cat == nullptr) return reject("unknown_category", fmt::format("unknown category '{}'", adj->category));
    if (!sign_ok(cat->kind, adj->amount)) {
      return reject("sign_convention",
                    fmt::format("{} category '{}' cannot take amount {}", to_string(cat->kind), cat->id, adj->amount));
    }
    if (adj->amount == baseline_.amounts.at(cat->id)) {
      own.selections.erase(cat->id);
    } else {
      auto match = std::find_if(pool_.begin(), pool_.end(), [&](const Proposal& p) {
        return p.category_id == cat->id && p.target == adj->amount;
      });
      if (match == pool_.end()) {
        pool_.push_back(Proposal{fmt::format("anon-{}", next), cat->id, adj->amount, {}, m.sender});
        match = std::prev(pool_.end());
      }
      own.selections[cat->id] = *match;
    }
    done_marks_.clear();
    commit();
    push_disagreement(out, next);
    return out;
  }

  if (const auto* sel = std::get_if<SelectProposalPayload>(&m.payload)) {
    if (!sel->budget.empty() && sel->budget != own.id) {
      return reject("not_owner", fmt::format("'{}' may not modify budget '{}'", m.sender, sel->budget));
    }
    if (baseline_.find(sel->category) == nullptr) {
      return reject("unknown_category", fmt::format("unknown category '{}'", sel->category));
    }
    auto match = std::find_if(pool_.begin(), pool_.end(), [&](const Proposal& p) { return p.id == sel->proposal; });
    if (match == pool_.end()) return reject("unknown_proposal", fmt::format("unknown proposal '{}'", sel->proposal));
    if (match->category_id != sel->category) {
      return reject("category_mismatch",
                    fmt::format("proposal '{}' adjusts '{}', not '{}'", match->id, match->category_id, sel->category));
    }
    own.selections[sel->category] = *match;
    done_marks_.clear();
    commit();
    push_disagreement(out, next);
    return out;
  }

  if (const auto* ballot = std::get_if<CompareBallotPayload>(&m.payload)) {
    const auto known = [&](const std::string& bid) {
      return std::any_of(budgets_.begin(), budgets_.end(), [&](const auto& kv) { return kv.second.id == bid; });
    };
    if (!known(ballot->budget_a) || !known(ballot->budget_b)) {
      return reject("unknown_budget", "ballot names a budget outside this session");
    }
    if (ballot->budget_a == ballot->budget_b ||
        (ballot->choice != ballot->budget_a && ballot->choice != ballot->budget_b)) {
      return reject("invalid_ballot", "choice must be one of two different budgets");
    }
    if (auto prior = board_.prior(m.sender, ballot->budget_a, ballot->budget_b)) {
      return reject("duplicate_ballot", "already voted on this pair", *prior);
    }
    board_.record(m.sender, ballot->budget_a, ballot->budget_b, ballot->choice);
    commit();
    return out;
  }

  if (const auto* adv = std::get_if<TrialAdvancePayload>(&m.payload)) {
    if (adv->phase != kPhaseDone) return reject("unknown_phase", fmt::format("unknown phase '{}'", adv->phase));
    if (done_marks_.contains(m.sender)) return reject("already_marked", "already marked done");
    done_marks_.insert(m.sender);
    commit();
    return out;
  }

  return reject("unsupported", "unsupported message");
}

void Session::replay(const std::vector<WireMessage>& events) {
  for (const auto& e : events) {
    if (e.seq != seq() + 1) {
      throw StructuralError(fmt::format("session '{}': expected seq {}, log has {}", id_, seq() + 1, e.seq));
    }
    const auto out = apply(e);
    if (!out.accepted || !out.event) {
      throw StructuralError(fmt::format("session '{}': logged event {} rejected on replay", id_, e.seq));
    }
  }
}

ComparisonBoard::Result Session::compare_ballot(const UserId& voter, const std::string& budget_a,
                                                const std::string& budget_b, const std::string& choice) {
  const auto out = apply(make_ballot(id_, voter, budget_a, budget_b, choice));
  if (out.accepted) return {true, {}};
  const auto& err = std::get<ErrorPayload>(out.reply->payload);
  if (err.code == "duplicate_ballot") return {false, err.prior};
  throw ValidationError(err.message);
}

std::vector<Suggestion> Session::suggestions(const CategoryId& category) const {
  std::vector<Suggestion> out;
  for (const auto& p : pool_) {
    if (p.category_id == category) out.push_back({p, usage(p.id)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) { return a.usage > b.usage; });
  return out;
}

ConsensusOutcome Session::consensus() const {
  ConsensusOutcome out;
  if (participants_.size() < 2) return out;
  Dollars worst = deficit(resolved(participants_[0]));
  for (std::size_t i = 1; i < participants_.size(); ++i) worst = std::max(worst, deficit(resolved(participants_[i])));
  out.achieved_deficit = worst;
  const bool identical = current_disagreement()->numerator == 0;
  const bool on_goal = !options_.goal || worst <= *options_.goal;
  if (identical && on_goal) {
    out.status = ConsensusStatus::Consensus;
  } else if (done_marks_.size() == participants_.size()) {
    out.status = ConsensusStatus::Partial;
  }
  return out;
}

WireMessage Session::snapshot(const UserId& recipient) const {
  SnapshotPayload p;
  p.baseline = baseline_;
  p.proposals = pool_;
  for (const auto& pr : pool_) p.usage[pr.id] = usage(pr.id);
  p.participants = participants_;
  for (const auto& u : participants_) {
    const Budget& b = budgets_.at(u);
    SnapshotBudget sb{b.id, b.owner, resolved(u), {}};
    for (const auto& [c, pr] : b.selections) sb.selections.emplace(c, pr.id);
    p.budgets.push_back(std::move(sb));
  }
  p.goal = options_.goal;
  (void)recipient;
  return WireMessage{id_, "server", seq(), std::move(p)};
}

std::string Session::canonical_state() const {
  json state = json::object();
  state["snapshot"] = json::parse(encode(snapshot({})));
  json ballots = json::array();
  for (const auto& [pair, votes] : board_.votes()) {
    for (const auto& [voter, choice] : votes) ballots.push_back({pair.first, pair.second, voter, choice});
  }
  state["ballots"] = ballots;
  state["done"] = json(std::vector<std::string>(done_marks_.begin(), done_marks_.end()));
  json log = json::array();
  for (const auto& e : log_) log.push_back(encode(e));
  state["log"] = log;
  state["max_participants"] = options_.max_participants;
  return state.dump();
}

std::pair<Session, ApplyOutcome> apply_event(Session session, const WireMessage& message) {
  ApplyOutcome out = session.apply(message);
  return {std::move(session), std::move(out)};
}

}  // namespace consensus
