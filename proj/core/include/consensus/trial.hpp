#pragma once

#include "consensus/budget.hpp"
#include "consensus/rng.hpp"
#include "consensus/session.hpp"

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace consensus {

// Orchestration of a moderated budgeting trial: individual budgets, a
// triadic vote inside camp-mixed groups of three, then cross-camp pairs
// collaborating toward a deficit goal.

enum class Camp { Conservative, Liberal };
enum class TrialPhase { Setup, Round1, Round2, Round3, Done };

/// SC, SL, MC, ML, or the lone member of the minority camp in a triad.
enum class Lean { StrongConservative, StrongLiberal, ModerateConservative, ModerateLiberal, Minority };

const char* to_string(Camp camp);
const char* to_string(TrialPhase phase);
const char* to_string(Lean lean);

using Triad = std::array<UserId, 3>;

struct TriadBallot {
  UserId voter;
  UserId choice;  // owner of the chosen budget
};

enum class PairKind { Strong, Moderate, Minority };

struct TrialPair {
  PairKind kind = PairKind::Strong;
  UserId conservative;
  UserId liberal;

  friend bool operator==(const TrialPair&, const TrialPair&) = default;
};

/// Phase-ordering or completeness violation.
class PhaseError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct TrialState {
  TrialPhase phase = TrialPhase::Setup;
  std::map<UserId, Camp> camps;
  std::vector<Triad> triads;
  std::map<UserId, Lean> classifications;
  std::vector<TrialPair> pairs;

  /// Camp holding two seats in the triad. Throws ValidationError unless
  /// the triad is a 2:1 mix of known users.
  Camp majority_camp(const Triad& triad) const;
};

/// Random triads, each two of one camp and one of the other. Camp sizes
/// must admit such a split: with C conservatives and L liberals, both
/// (2C - L) and (2L - C) must be non-negative multiples of three.
std::vector<Triad> form_triads(const std::map<UserId, Camp>& camps, Rng& rng);

/// Applies triadic ballots. In each triad whose three ballots are all
/// present, the majority member picked by the minority member is Moderate,
/// the other majority member Strong, and the minority member Minority.
/// Triads missing ballots stay unclassified. Throws ValidationError for a
/// self-vote, a vote outside the voter's triad, an unknown voter or a
/// second ballot from the same voter. Labels depend only on the ballot
/// set, never on arrival order.
std::map<UserId, Lean> run_trial_round2(TrialState& trial, const std::vector<TriadBallot>& ballots);

/// SC with SL, MC with ML, minority conservative with minority liberal,
/// matched in triad order. Throws PhaseError while any user is
/// unclassified or a label has no counterpart.
std::vector<TrialPair> pair_for_round3(TrialState& trial);

/// Half the baseline deficit, rounded toward the stricter (lower) goal.
Dollars halved_deficit_goal(const Baseline& baseline);

/// Fresh two-user collaboration session for a Round 3 pair.
Session open_pair_session(const TrialPair& pair, const Baseline& baseline, std::vector<Proposal> pool,
                          std::string session_id);

/// Phase machine over TrialState.
class Trial {
 public:
  Trial(std::map<UserId, Camp> camps, Baseline baseline, std::vector<Proposal> pool = {});

  const TrialState& state() const { return state_; }
  TrialPhase phase() const { return state_.phase; }

  /// Setup -> Round1.
  void begin_round1();
  /// Round 1: each user files an individual budget.
  void submit_budget(const UserId& user, Budget budget);
  /// Round1 -> Round2; needs every budget, forms triads.
  void begin_round2(Rng& rng);
  /// Round 2 ballots, accumulated across calls.
  void cast(const std::vector<TriadBallot>& ballots);
  /// Round2 -> Round3; needs every triad classified. Opens pair sessions
  /// seeded with both users' Round 1 budgets.
  void begin_round3();
  std::vector<Session>& pair_sessions() { return sessions_; }
  /// Round3 -> Done.
  void finish();

  const Budget& budget_of(const UserId& user) const;

 private:
  void require(TrialPhase phase, const char* action) const;

  TrialState state_;
  Baseline baseline_;
  std::vector<Proposal> pool_;
  std::map<UserId, Budget> budgets_;
  std::vector<TriadBallot> ballots_;
  std::vector<Session> sessions_;
};

}  // namespace consensus
