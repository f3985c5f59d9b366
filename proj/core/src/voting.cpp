#include "consensus/voting.hpp"
#include "wide_int.hpp"

#include "consensus/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace consensus {

const char* to_string(Scheme scheme) { return scheme == Scheme::Triadic ? "triadic" : "hotornot"; }

std::optional<Scheme> parse_scheme(std::string_view text) {
  if (text == "triadic") return Scheme::Triadic;
  if (text == "hotornot" || text == "hot-or-not") return Scheme::HotOrNot;
  return std::nullopt;
}

std::size_t group_size(Scheme scheme) { return scheme == Scheme::Triadic ? 3 : 2; }

namespace {

struct Ratio {
  std::int64_t num;
  std::int64_t den;
};

Ratio budget_distance(const AmountMap& p, const AmountMap& q) {
  const auto report = disagreement(p, q);
  if (report.denominator == 0) return {0, 1};
  return {report.numerator, report.denominator};
}

int sign_of(double v) { return (v > 0) - (v < 0); }

// Side of the candidates' midpoint the voter stands on. The midpoint is a
// single rounding of (a + b) / 2, so decimally symmetric inputs such as 0.2
// and 0.8 around 0.5 tie; subtracting the two distances would not.
int line_compare(double voter, double a, double b) {
  if (a == b) return 0;
  const int side = sign_of(voter - (a + b) / 2);
  return a < b ? side : -side;
}

}  // namespace

void OpinionSpace::check(const Position& p) const {
  if (kind_ == Kind::Line1D) {
    const double* x = std::get_if<double>(&p);
    if (x == nullptr) throw ValidationError("line opinion space expects real positions");
    if (!(*x >= 0.0 && *x <= 1.0)) throw ValidationError(fmt::format("line position {} outside [0, 1]", *x));
  } else if (!std::holds_alternative<AmountMap>(p)) {
    throw ValidationError("budget opinion space expects resolved budgets");
  }
}

double OpinionSpace::distance(const Position& p, const Position& q) const {
  if (kind_ == Kind::Line1D) return std::fabs(std::get<double>(p) - std::get<double>(q));
  return disagreement(std::get<AmountMap>(p), std::get<AmountMap>(q)).raw;
}

int OpinionSpace::compare(const Position& voter, const Position& a, const Position& b) const {
  if (kind_ == Kind::Line1D) return line_compare(std::get<double>(voter), std::get<double>(a), std::get<double>(b));
  const auto& v = std::get<AmountMap>(voter);
  const Ratio da = budget_distance(v, std::get<AmountMap>(a));
  const Ratio db = budget_distance(v, std::get<AmountMap>(b));
  const Int128 lhs = static_cast<Int128>(da.num) * db.den;
  const Int128 rhs = static_cast<Int128>(db.num) * da.den;
  return (lhs > rhs) - (lhs < rhs);
}

void VoterPopulation::validate(std::size_t min_size) const {
  if (voters.size() < min_size) {
    throw ValidationError(fmt::format("population of {} is smaller than the required {}", voters.size(), min_size));
  }
  for (const auto& p : voters) space.check(p);
}

VoterPopulation uniform_population(std::size_t n, std::uint64_t seed) {
  VoterPopulation pop;
  pop.seed = seed;
  pop.voters.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) pop.voters.emplace_back(rng.uniform01());
  return pop;
}

VoterPopulation line_population(std::vector<double> positions, std::uint64_t seed) {
  VoterPopulation pop;
  pop.seed = seed;
  pop.voters.assign(positions.begin(), positions.end());
  pop.validate();
  return pop;
}

Pick vote(const Position& voter, const Position& a, const Position& b, const OpinionSpace& space, Rng& rng) {
  space.check(voter);
  space.check(a);
  space.check(b);
  const int c = space.compare(voter, a, b);
  if (c < 0) return Pick::First;
  if (c > 0) return Pick::Second;
  return rng.coin() ? Pick::First : Pick::Second;
}

namespace {

void require_distinct(std::size_t n, std::initializer_list<std::size_t> ids) {
  for (auto it = ids.begin(); it != ids.end(); ++it) {
    if (*it >= n) throw ValidationError(fmt::format("voter index {} out of range for population {}", *it, n));
    for (auto jt = ids.begin(); jt != it; ++jt) {
      if (*it == *jt) throw ValidationError(fmt::format("voter {} appears twice in one round", *it));
    }
  }
}

// Index (0..2) of the winner given each member's choice among the others.
std::size_t tally_triad(const std::array<std::size_t, 3>& choice_of, Rng& rng) {
  std::array<int, 3> votes{};
  for (auto c : choice_of) ++votes[c];
  for (std::size_t i = 0; i < 3; ++i) {
    if (votes[i] >= 2) return i;
  }
  return static_cast<std::size_t>(rng.below(3));
}

}  // namespace

VoteRound triadic_round(const VoterPopulation& population, std::size_t x, std::size_t y, std::size_t z, Rng& rng) {
  require_distinct(population.size(), {x, y, z});
  const std::array<std::size_t, 3> members{x, y, z};
  std::array<std::size_t, 3> choice_of{};
  VoteRound round;
  round.scheme = Scheme::Triadic;
  round.participants.assign(members.begin(), members.end());
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t first = (i + 1) % 3;
    const std::size_t second = (i + 2) % 3;
    const Pick pick = vote(population.voters[members[i]], population.voters[members[first]],
                           population.voters[members[second]], population.space, rng);
    choice_of[i] = pick == Pick::First ? first : second;
    round.ballots.push_back({members[i], members[choice_of[i]]});
  }
  round.winner = members[tally_triad(choice_of, rng)];
  return round;
}

VoteRound hot_or_not_round(const VoterPopulation& population, std::size_t a, std::size_t b, std::size_t judge,
                           Rng& rng) {
  require_distinct(population.size(), {a, b, judge});
  VoteRound round;
  round.scheme = Scheme::HotOrNot;
  round.participants = {a, b, judge};
  const Pick pick = vote(population.voters[judge], population.voters[a], population.voters[b], population.space, rng);
  round.winner = pick == Pick::First ? a : b;
  round.ballots.push_back({judge, round.winner});
  return round;
}

namespace {

std::size_t draw_judge(std::size_t population, std::size_t a, std::size_t b, Rng& rng) {
  // Uniform over the population minus {a, b}.
  auto j = static_cast<std::size_t>(rng.below(population - 2));
  const std::size_t lo = std::min(a, b);
  const std::size_t hi = std::max(a, b);
  if (j >= lo) ++j;
  if (j >= hi) ++j;
  return j;
}

}  // namespace

Tournament run_tournament(const VoterPopulation& population, Scheme scheme, std::size_t stop_count, Rng& rng) {
  if (stop_count < 1) throw ValidationError("tournament stop count must be >= 1");
  const std::size_t g = group_size(scheme);
  const std::size_t n = population.size();
  // A stage is only needed when the field exceeds the stop count; every
  // played round then needs a judge or a triad from the population.
  if (n > stop_count) population.validate(std::max<std::size_t>(3, stop_count));
  else population.validate(1);

  Tournament t;
  t.scheme = scheme;
  t.population = population;
  t.stop_count = stop_count;

  std::vector<std::size_t> field(n);
  for (std::size_t i = 0; i < n; ++i) field[i] = i;
  t.survivors.push_back(field);

  std::size_t stage = 0;
  while (field.size() > stop_count) {
    ++stage;
    std::vector<std::size_t> next;
    if (field.size() < g) {
      // Triadic field of two: one pairwise runoff.
      auto r = hot_or_not_round(population, field[0], field[1], draw_judge(n, field[0], field[1], rng), rng);
      r.stage = stage;
      next.push_back(r.winner);
      t.rounds.push_back(std::move(r));
    } else {
      rng.shuffle(std::span<std::size_t>(field));
      const std::size_t full = field.size() / g * g;
      for (std::size_t i = 0; i < full; i += g) {
        VoteRound r = scheme == Scheme::Triadic
                          ? triadic_round(population, field[i], field[i + 1], field[i + 2], rng)
                          : hot_or_not_round(population, field[i], field[i + 1],
                                             draw_judge(n, field[i], field[i + 1], rng), rng);
        r.stage = stage;
        next.push_back(r.winner);
        t.rounds.push_back(std::move(r));
      }
      for (std::size_t i = full; i < field.size(); ++i) next.push_back(field[i]);
    }
    std::sort(next.begin(), next.end());
    field = std::move(next);
    t.survivors.push_back(field);
  }
  t.winners = field;
  return t;
}

std::optional<std::size_t> condorcet_winner(const VoterPopulation& population) {
  const std::size_t n = population.size();
  population.validate();
  for (std::size_t i = 0; i < n; ++i) {
    bool beats_all = true;
    for (std::size_t j = 0; j < n && beats_all; ++j) {
      if (j == i) continue;
      std::size_t for_i = 0;
      std::size_t for_j = 0;
      for (const auto& voter : population.voters) {
        const int c = population.space.compare(voter, population.voters[i], population.voters[j]);
        if (c < 0) ++for_i;
        else if (c > 0) ++for_j;
      }
      beats_all = for_i > for_j;
    }
    if (beats_all) return i;
  }
  return std::nullopt;
}

namespace line {

double vote(double voter, double a, double b, Rng& rng) {
  const int c = line_compare(voter, a, b);
  if (c < 0) return a;
  if (c > 0) return b;
  return rng.coin() ? a : b;
}

double triadic_winner(double x, double y, double z, Rng& rng) {
  const std::array<double, 3> pos{x, y, z};
  std::array<std::size_t, 3> choice_of{};
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t first = (i + 1) % 3;
    const std::size_t second = (i + 2) % 3;
    const int c = line_compare(pos[i], pos[first], pos[second]);
    const bool pick_first = c < 0 || (c == 0 && rng.coin());
    choice_of[i] = pick_first ? first : second;
  }
  return pos[tally_triad(choice_of, rng)];
}

double hot_or_not_winner(double a, double b, double judge, Rng& rng) { return vote(judge, a, b, rng); }

}  // namespace line

}  // namespace consensus
