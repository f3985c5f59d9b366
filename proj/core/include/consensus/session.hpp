#pragma once

#include "consensus/budget.hpp"
#include "consensus/wire.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace consensus {

using UserId = std::string;

struct PairTally {
  std::string first;  // the budget with more votes (lexicographic on a tie)
  std::string second;
  std::size_t first_votes = 0;
  std::size_t second_votes = 0;

  friend bool operator==(const PairTally&, const PairTally&) = default;
};

/// Pairwise "which budget is better" ballots, one per voter per unordered
/// pair.
class ComparisonBoard {
 public:
  struct Result {
    bool accepted = false;
    std::string prior;  // the earlier choice when rejected as a duplicate
  };

  /// Throws ValidationError if a == b or choice is neither.
  Result record(const UserId& voter, const std::string& budget_a, const std::string& budget_b,
                const std::string& choice);

  std::optional<std::string> prior(const UserId& voter, const std::string& budget_a,
                                   const std::string& budget_b) const;
  PairTally tally(const std::string& budget_a, const std::string& budget_b) const;

  /// Every voted pair, leader first, sorted by pair.
  std::vector<PairTally> ranking() const;

  std::size_t ballots() const;

  using Pair = std::pair<std::string, std::string>;  // sorted
  using Votes = std::map<Pair, std::map<UserId, std::string>>;
  const Votes& votes() const { return votes_; }

  friend bool operator==(const ComparisonBoard&, const ComparisonBoard&) = default;

 private:
  Votes votes_;
};

struct SessionOptions {
  /// Collaboration sessions hold two users.
  std::size_t max_participants = 2;
  std::optional<Dollars> goal;
  /// Users present from creation (trial pairs); others join with Hello.
  std::vector<UserId> participants;

  friend bool operator==(const SessionOptions&, const SessionOptions&) = default;
};

struct Suggestion {
  Proposal proposal;
  std::uint64_t usage = 0;
};

enum class ConsensusStatus { Open, Consensus, Partial };

const char* to_string(ConsensusStatus status);

struct ConsensusOutcome {
  ConsensusStatus status = ConsensusStatus::Open;
  /// Highest deficit among the participants' budgets.
  std::optional<Dollars> achieved_deficit;
};

/// Result of applying one client message.
struct ApplyOutcome {
  bool accepted = false;
  /// The logged event (with its sequence number) when accepted.
  std::optional<WireMessage> event;
  /// Messages for every participant, in order.
  std::vector<WireMessage> broadcast;
  /// Message for the sender only (Snapshot or Error).
  std::optional<WireMessage> reply;
};

/// Event-sourced collaboration session.
///
/// Every accepted mutation is appended to the log with the next sequence
/// number; the state is a pure function of (id, baseline, proposal pool,
/// options, log). Not thread-safe: callers serialize access per session.
class Session {
 public:
  Session(std::string id, Baseline baseline, std::vector<Proposal> pool, SessionOptions options = {});

  const std::string& id() const { return id_; }
  const Baseline& baseline() const { return baseline_; }
  const SessionOptions& options() const { return options_; }
  const std::vector<UserId>& participants() const { return participants_; }
  bool is_participant(const UserId& user) const;

  const Budget& budget_of(const UserId& user) const;
  AmountMap resolved(const UserId& user) const;
  const std::vector<Proposal>& proposals() const { return pool_; }

  std::uint64_t seq() const { return log_.empty() ? 0 : log_.back().seq; }
  const std::vector<WireMessage>& log() const { return log_; }

  /// Validates and applies a client message. Rejections leave the session
  /// untouched and come back as an Error reply.
  ApplyOutcome apply(const WireMessage& message);

  /// Re-applies logged events; each must carry the next sequence number.
  /// Throws StructuralError if an event is rejected or out of order.
  void replay(const std::vector<WireMessage>& events);

  /// Records a comparison ballot without going through the wire.
  ComparisonBoard::Result compare_ballot(const UserId& voter, const std::string& budget_a,
                                         const std::string& budget_b, const std::string& choice);
  const ComparisonBoard& comparisons() const { return board_; }

  /// Disagreement between the first two participants' budgets.
  std::optional<DisagreementReport> current_disagreement() const;

  /// Existing proposals for a category, most used first.
  std::vector<Suggestion> suggestions(const CategoryId& category) const;

  /// Consensus: identical budgets at or under the goal. Partial: every
  /// participant marked the session done without reaching consensus.
  ConsensusOutcome consensus() const;

  WireMessage snapshot(const UserId& recipient) const;

  /// Canonical serialization of the whole state, used for replay checks.
  std::string canonical_state() const;

 private:
  ApplyOutcome reject(std::string code, std::string message, std::string prior = {}) const;
  std::uint64_t usage(const std::string& proposal_id) const;
  void add_participant(const UserId& user);
  void push_disagreement(ApplyOutcome& out, std::uint64_t seq) const;

  std::string id_;
  Baseline baseline_;
  std::vector<Proposal> pool_;
  SessionOptions options_;
  std::vector<UserId> participants_;
  std::map<UserId, Budget> budgets_;
  ComparisonBoard board_;
  std::set<UserId> done_marks_;
  std::vector<WireMessage> log_;
};

/// Pure form: returns the updated session alongside the outcome.
std::pair<Session, ApplyOutcome> apply_event(Session session, const WireMessage& message);

inline constexpr const char* kPhaseDone = "Done";

}  // namespace consensus
