#pragma once

#include "consensus/budget.hpp"
#include "consensus/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace consensus {

enum class Scheme { HotOrNot, Triadic };

const char* to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view text);

/// Candidates per group: 2 for Hot-or-Not, 3 for Triadic.
std::size_t group_size(Scheme scheme);

/// A point in opinion space: a real on [0, 1] for the line model, or a
/// resolved budget.
using Position = std::variant<double, AmountMap>;

/// Distance model over positions.
///
/// Line1D uses |x - y|. BudgetSpace uses the raw disagreement between two
/// resolved budgets; this is the bridge that lets the line-model voting
/// rules run on real budgets, it is not something the line model implies.
class OpinionSpace {
 public:
  enum class Kind { Line1D, BudgetSpace };

  static OpinionSpace line() { return OpinionSpace(Kind::Line1D); }
  static OpinionSpace budgets() { return OpinionSpace(Kind::BudgetSpace); }

  Kind kind() const { return kind_; }

  double distance(const Position& p, const Position& q) const;

  /// Sign of distance(voter, a) - distance(voter, b): negative when `a` is
  /// closer. Exact for BudgetSpace (integer cross-multiplication).
  int compare(const Position& voter, const Position& a, const Position& b) const;

  /// Throws ValidationError if `p` does not belong to this space.
  void check(const Position& p) const;

  friend bool operator==(const OpinionSpace&, const OpinionSpace&) = default;

 private:
  explicit OpinionSpace(Kind kind) : kind_(kind) {}
  Kind kind_;
};

/// Voters, each of whom also authors the proposal at its own position, so
/// voter index == proposal index.
struct VoterPopulation {
  OpinionSpace space = OpinionSpace::line();
  std::vector<Position> voters;
  std::uint64_t seed = 0;

  std::size_t size() const { return voters.size(); }
  void validate(std::size_t min_size = 0) const;

  friend bool operator==(const VoterPopulation&, const VoterPopulation&) = default;
};

/// `n` voters drawn uniformly from [0, 1] with the given seed.
VoterPopulation uniform_population(std::size_t n, std::uint64_t seed);
VoterPopulation line_population(std::vector<double> positions, std::uint64_t seed = 0);

enum class Pick { First, Second };

/// The closer candidate; exact ties go to a fair coin from `rng`.
Pick vote(const Position& voter, const Position& a, const Position& b, const OpinionSpace& space, Rng& rng);

struct Ballot {
  std::size_t voter = 0;
  std::size_t choice = 0;  // proposal index

  friend bool operator==(const Ballot&, const Ballot&) = default;
};

struct VoteRound {
  Scheme scheme = Scheme::Triadic;
  std::size_t stage = 0;
  std::vector<std::size_t> participants;
  std::vector<Ballot> ballots;
  std::size_t winner = 0;

  friend bool operator==(const VoteRound&, const VoteRound&) = default;
};

/// x votes between y and z, y between x and z, z between x and y. Most
/// ballots wins; a 1-1-1 split (only reachable through tie-break coins) is
/// settled uniformly at random.
VoteRound triadic_round(const VoterPopulation& population, std::size_t x, std::size_t y, std::size_t z, Rng& rng);

/// `judge` picks between candidates a and b.
VoteRound hot_or_not_round(const VoterPopulation& population, std::size_t a, std::size_t b, std::size_t judge,
                           Rng& rng);

struct Tournament {
  Scheme scheme = Scheme::Triadic;
  VoterPopulation population;
  std::size_t stop_count = 1;
  std::vector<VoteRound> rounds;
  std::vector<std::vector<std::size_t>> survivors;  // survivors[0] is the full field
  std::vector<std::size_t> winners;

  std::size_t stages() const { return survivors.empty() ? 0 : survivors.size() - 1; }
  friend bool operator==(const Tournament&, const Tournament&) = default;
};

/// Iterative elimination. Each stage shuffles the surviving proposals into
/// disjoint groups of the scheme's size; group winners advance, as does
/// any undersized leftover group. Stops once at most `stop_count` remain.
///
/// All voters keep judging after their proposals are eliminated. Hot-or-Not
/// judges are drawn uniformly from voters who are not candidates in the
/// pair. When a Triadic field is stuck at two survivors above `stop_count`,
/// the pair is settled by one Hot-or-Not runoff.
Tournament run_tournament(const VoterPopulation& population, Scheme scheme, std::size_t stop_count, Rng& rng);

/// Proposal beating every other proposal in a full-population pairwise
/// vote (tied voters abstain), found by exhaustive enumeration.
std::optional<std::size_t> condorcet_winner(const VoterPopulation& population);

// Allocation-free line-model kernels shared with the rounds above; the
// Monte Carlo harness calls these directly.
namespace line {

double vote(double voter, double a, double b, Rng& rng);
double triadic_winner(double x, double y, double z, Rng& rng);
double hot_or_not_winner(double a, double b, double judge, Rng& rng);

}  // namespace line

}  // namespace consensus
