#include "consensus/trial.hpp"

#include "consensus/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace consensus {

const char* to_string(Camp camp) { return camp == Camp::Conservative ? "conservative" : "liberal"; }

const char* to_string(TrialPhase phase) {
  switch (phase) {
    case TrialPhase::Setup: return "Setup";
    case TrialPhase::Round1: return "Round1";
    case TrialPhase::Round2: return "Round2";
    case TrialPhase::Round3: return "Round3";
    case TrialPhase::Done: return "Done";
  }
  return "?";
}

const char* to_string(Lean lean) {
  switch (lean) {
    case Lean::StrongConservative: return "SC";
    case Lean::StrongLiberal: return "SL";
    case Lean::ModerateConservative: return "MC";
    case Lean::ModerateLiberal: return "ML";
    case Lean::Minority: return "Minority";
  }
  return "?";
}

Camp TrialState::majority_camp(const Triad& triad) const {
  int conservatives = 0;
  for (const auto& u : triad) {
    auto it = camps.find(u);
    if (it == camps.end()) throw ValidationError(fmt::format("'{}' has no camp", u));
    if (it->second == Camp::Conservative) ++conservatives;
  }
  if (triad[0] == triad[1] || triad[0] == triad[2] || triad[1] == triad[2]) {
    throw ValidationError("a triad needs three different users");
  }
  if (conservatives == 2) return Camp::Conservative;
  if (conservatives == 1) return Camp::Liberal;
  throw ValidationError(fmt::format("triad {{{}, {}, {}}} is not a 2:1 camp mix", triad[0], triad[1], triad[2]));
}

std::vector<Triad> form_triads(const std::map<UserId, Camp>& camps, Rng& rng) {
  std::vector<UserId> cons;
  std::vector<UserId> libs;
  for (const auto& [u, c] : camps) (c == Camp::Conservative ? cons : libs).push_back(u);
  const auto C = static_cast<long>(cons.size());
  const auto L = static_cast<long>(libs.size());
  const long two_c = 2 * C - L;  // 3 x (conservative-majority triads)
  const long two_l = 2 * L - C;
  if (two_c < 0 || two_l < 0 || two_c % 3 != 0 || two_l % 3 != 0) {
    throw ValidationError(fmt::format("{} conservatives and {} liberals cannot form 2:1 triads", C, L));
  }
  rng.shuffle(std::span<UserId>(cons));
  rng.shuffle(std::span<UserId>(libs));
  std::vector<Triad> out;
  std::size_t ci = 0;
  std::size_t li = 0;
  for (long i = 0; i < two_c / 3; ++i, ci += 2, ++li) out.push_back({cons[ci], cons[ci + 1], libs[li]});
  for (long i = 0; i < two_l / 3; ++i, li += 2, ++ci) out.push_back({libs[li], libs[li + 1], cons[ci]});
  rng.shuffle(std::span<Triad>(out));
  return out;
}

std::map<UserId, Lean> run_trial_round2(TrialState& trial, const std::vector<TriadBallot>& ballots) {
  std::map<UserId, std::size_t> triad_of;
  for (std::size_t t = 0; t < trial.triads.size(); ++t) {
    trial.majority_camp(trial.triads[t]);
    for (const auto& u : trial.triads[t]) {
      if (!triad_of.emplace(u, t).second) throw ValidationError(fmt::format("'{}' sits in two triads", u));
    }
  }

  std::map<UserId, UserId> choice_of;
  for (const auto& b : ballots) {
    auto it = triad_of.find(b.voter);
    if (it == triad_of.end()) throw ValidationError(fmt::format("'{}' is not in any triad", b.voter));
    if (b.choice == b.voter) throw ValidationError(fmt::format("'{}' voted for their own budget", b.voter));
    const Triad& triad = trial.triads[it->second];
    if (std::find(triad.begin(), triad.end(), b.choice) == triad.end()) {
      throw ValidationError(fmt::format("'{}' voted for '{}' outside their triad", b.voter, b.choice));
    }
    if (!choice_of.emplace(b.voter, b.choice).second) {
      throw ValidationError(fmt::format("'{}' cast two ballots", b.voter));
    }
  }

  for (const auto& triad : trial.triads) {
    if (!std::all_of(triad.begin(), triad.end(), [&](const UserId& u) { return choice_of.contains(u); })) continue;
    const Camp majority = trial.majority_camp(triad);
    const auto minority = *std::find_if(triad.begin(), triad.end(),
                                        [&](const UserId& u) { return trial.camps.at(u) != majority; });
    const UserId& moderate = choice_of.at(minority);
    const bool cons = majority == Camp::Conservative;
    for (const auto& u : triad) {
      if (u == minority) trial.classifications[u] = Lean::Minority;
      else if (u == moderate) trial.classifications[u] = cons ? Lean::ModerateConservative : Lean::ModerateLiberal;
      else trial.classifications[u] = cons ? Lean::StrongConservative : Lean::StrongLiberal;
    }
  }
  return trial.classifications;
}

std::vector<TrialPair> pair_for_round3(TrialState& trial) {
  std::vector<UserId> sc, sl, mc, ml, min_c, min_l;
  for (const auto& triad : trial.triads) {
    for (const auto& u : triad) {
      auto it = trial.classifications.find(u);
      if (it == trial.classifications.end()) throw PhaseError(fmt::format("'{}' is not classified yet", u));
      switch (it->second) {
        case Lean::StrongConservative: sc.push_back(u); break;
        case Lean::StrongLiberal: sl.push_back(u); break;
        case Lean::ModerateConservative: mc.push_back(u); break;
        case Lean::ModerateLiberal: ml.push_back(u); break;
        case Lean::Minority: (trial.camps.at(u) == Camp::Conservative ? min_c : min_l).push_back(u); break;
      }
    }
  }
  if (sc.size() != sl.size() || mc.size() != ml.size() || min_c.size() != min_l.size()) {
    throw PhaseError("labels are unbalanced between camps; cannot form cross-camp pairs");
  }
  std::vector<TrialPair> pairs;
  for (std::size_t i = 0; i < sc.size(); ++i) pairs.push_back({PairKind::Strong, sc[i], sl[i]});
  for (std::size_t i = 0; i < mc.size(); ++i) pairs.push_back({PairKind::Moderate, mc[i], ml[i]});
  for (std::size_t i = 0; i < min_c.size(); ++i) pairs.push_back({PairKind::Minority, min_c[i], min_l[i]});
  trial.pairs = pairs;
  return pairs;
}

Dollars halved_deficit_goal(const Baseline& baseline) {
  const Dollars d = deficit(baseline.amounts);
  // Floor division keeps the goal at or below exactly half.
  return d >= 0 ? d / 2 : -((-d + 1) / 2);
}

Session open_pair_session(const TrialPair& pair, const Baseline& baseline, std::vector<Proposal> pool,
                          std::string session_id) {
  SessionOptions opt;
  opt.max_participants = 2;
  opt.goal = halved_deficit_goal(baseline);
  opt.participants = {pair.conservative, pair.liberal};
  return Session(std::move(session_id), baseline, std::move(pool), std::move(opt));
}

Trial::Trial(std::map<UserId, Camp> camps, Baseline baseline, std::vector<Proposal> pool)
    : baseline_(std::move(baseline)), pool_(std::move(pool)) {
  baseline_.validate();
  state_.camps = std::move(camps);
}

void Trial::require(TrialPhase phase, const char* action) const {
  if (state_.phase != phase) {
    throw PhaseError(fmt::format("{} needs phase {}, trial is in {}", action, to_string(phase), to_string(state_.phase)));
  }
}

void Trial::begin_round1() {
  require(TrialPhase::Setup, "begin_round1");
  state_.phase = TrialPhase::Round1;
}

void Trial::submit_budget(const UserId& user, Budget budget) {
  require(TrialPhase::Round1, "submit_budget");
  if (!state_.camps.contains(user)) throw ValidationError(fmt::format("'{}' is not enrolled", user));
  budget.owner = user;
  resolve_amounts(budget, baseline_);  // validates
  budgets_[user] = std::move(budget);
}

const Budget& Trial::budget_of(const UserId& user) const {
  auto it = budgets_.find(user);
  if (it == budgets_.end()) throw StructuralError(fmt::format("no budget from '{}'", user));
  return it->second;
}

void Trial::begin_round2(Rng& rng) {
  require(TrialPhase::Round1, "begin_round2");
  for (const auto& [u, _] : state_.camps) {
    if (!budgets_.contains(u)) throw PhaseError(fmt::format("'{}' has not filed a budget", u));
  }
  state_.triads = form_triads(state_.camps, rng);
  state_.phase = TrialPhase::Round2;
}

void Trial::cast(const std::vector<TriadBallot>& ballots) {
  require(TrialPhase::Round2, "cast");
  std::vector<TriadBallot> all = ballots_;
  all.insert(all.end(), ballots.begin(), ballots.end());
  TrialState scratch = state_;
  run_trial_round2(scratch, all);  // throws before anything is kept
  state_ = std::move(scratch);
  ballots_ = std::move(all);
}

void Trial::begin_round3() {
  require(TrialPhase::Round2, "begin_round3");
  TrialState scratch = state_;
  const auto pairs = pair_for_round3(scratch);
  std::vector<Session> sessions;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::vector<Proposal> pool = pool_;
    for (const auto& user : {pairs[i].conservative, pairs[i].liberal}) {
      for (const auto& [_, p] : budget_of(user).selections) {
        const bool known = std::any_of(pool.begin(), pool.end(), [&](const Proposal& q) { return q.id == p.id; });
        if (!known) pool.push_back(p);
      }
    }
    Session s = open_pair_session(pairs[i], baseline_, std::move(pool), fmt::format("pair-{}", i + 1));
    for (const auto& user : {pairs[i].conservative, pairs[i].liberal}) {
      for (const auto& [cat, p] : budget_of(user).selections) s.apply(make_select(s.id(), user, cat, p.id));
    }
    sessions.push_back(std::move(s));
  }
  state_ = std::move(scratch);
  sessions_ = std::move(sessions);
  state_.phase = TrialPhase::Round3;
}

void Trial::finish() {
  require(TrialPhase::Round3, "finish");
  state_.phase = TrialPhase::Done;
}

}  // namespace consensus
