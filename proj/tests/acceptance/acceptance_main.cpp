// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances are fixed here, not read from
// flags, so a run cannot be loosened from the command line.

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "../support/session_script.hpp"

#include <consensus/density.hpp>
#include <consensus/ingest.hpp>
#include <consensus/session.hpp>
#include <consensus/trial.hpp>
#include <consensus/voting.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

using namespace consensus;

namespace {

constexpr std::uint64_t kTrials = 1'000'000;
constexpr std::size_t kBins = 50;
constexpr std::uint64_t kSeed = 20120601;

constexpr double kDensityL1 = 0.02;
constexpr double kMixtureL1 = 0.03;
constexpr double kDensitySeconds = 10.0;
constexpr double kTriadicVariance = 0.05;
constexpr double kTriadicVarianceTol = 0.002;
constexpr double kHotOrNotVariance = 0.0667;
constexpr double kHotOrNotVarianceTol = 0.003;
constexpr double kMeanTol = 0.002;
constexpr int kCondorcetPopulations = 1000;
constexpr std::size_t kCondorcetMaxSize = 15;
constexpr double kCondorcetSeconds = 5.0;
constexpr int kTriads = 10'000;
constexpr int kMetricPairs = 10'000;
constexpr int kSessionSequences = 1000;
constexpr int kSessionEvents = 60;
constexpr int kBaselines = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome density_criterion(Scheme scheme) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = sample_winner_density(scheme, {kTrials, kBins, kSeed, 0});
  const double elapsed = seconds_since(t0);
  const bool pass = s.fit.l1 <= kDensityL1 && elapsed < kDensitySeconds;
  return {pass, fmt::format("L1 {:.6f} (limit {}), {:.2f} s (limit {} s), N={} B={}", s.fit.l1, kDensityL1, elapsed,
                            kDensitySeconds, kTrials, kBins)};
}

Outcome mixture_criterion() {
  const auto m = verify_mixture_identity({kTrials, kBins, kSeed, 0});
  return {m.fit.l1 <= kMixtureL1, fmt::format("L1 {:.6f} (limit {}), N={} B={}", m.fit.l1, kMixtureL1, kTrials, kBins)};
}

Outcome moments_criterion() {
  const auto t = moment_report(Scheme::Triadic, kTrials, kSeed);
  const auto h = moment_report(Scheme::HotOrNot, kTrials, kSeed + 1);
  const bool pass = std::fabs(t.variance - kTriadicVariance) <= kTriadicVarianceTol &&
                    std::fabs(h.variance - kHotOrNotVariance) <= kHotOrNotVarianceTol &&
                    std::fabs(t.mean - 0.5) <= kMeanTol && std::fabs(h.mean - 0.5) <= kMeanTol;
  return {pass, fmt::format("triadic var {:.6f} (0.05 +- {}), mean {:.6f}; hot-or-not var {:.6f} (0.0667 +- {}), "
                            "mean {:.6f} (0.5 +- {})",
                            t.variance, kTriadicVarianceTol, t.mean, h.variance, kHotOrNotVarianceTol, h.mean,
                            kMeanTol)};
}

std::vector<double> distinct_positions(Rng& rng, std::size_t n) {
  std::set<double> seen;
  std::vector<double> out;
  while (out.size() < n) {
    const double x = rng.uniform01();
    if (seen.insert(x).second) out.push_back(x);
  }
  return out;
}

Outcome condorcet_criterion() {
  Rng rng(kSeed);
  const auto t0 = std::chrono::steady_clock::now();
  int agree = 0;
  for (int i = 0; i < kCondorcetPopulations; ++i) {
    const auto n = 1 + 2 * static_cast<std::size_t>(rng.below(kCondorcetMaxSize / 2 + 1));
    const auto xs = distinct_positions(rng, n);
    const auto got = condorcet_winner(line_population(xs));
    const auto brute = oracle::condorcet_line(xs);
    if (got && brute && *got == *brute && xs[*got] == oracle::median_of(xs)) ++agree;
  }
  const double elapsed = seconds_since(t0);
  return {agree == kCondorcetPopulations && elapsed < kCondorcetSeconds,
          fmt::format("{}/{} populations (odd n <= {}) elect the median, {:.3f} s (limit {} s)", agree,
                      kCondorcetPopulations, kCondorcetMaxSize, elapsed, kCondorcetSeconds)};
}

Outcome triad_criterion() {
  Rng rng(kSeed + 2);
  int agree = 0;
  for (int i = 0; i < kTriads; ++i) {
    const auto xs = distinct_positions(rng, 3);
    const auto pop = line_population(xs);
    const auto r = triadic_round(pop, 0, 1, 2, rng);
    if (xs[r.winner] == oracle::median_of(xs)) ++agree;
  }
  return {agree == kTriads, fmt::format("{}/{} triads won by the median", agree, kTriads)};
}

Outcome metric_criterion() {
  const AmountMap a{{"Defense", -700}, {"Health", -800}, {"Taxes", 1200}};
  const AmountMap b{{"Defense", -600}, {"Health", -800}, {"Taxes", 1400}};
  const auto fixture = disagreement(a, b);
  const bool fixture_ok = fixture.raw_text() == "0.109091" && fixture.display == kClampedToken;

  Rng rng(kSeed + 3);
  int symmetric = 0;
  int identity = 0;
  for (int i = 0; i < kMetricPairs; ++i) {
    const auto [x, y] = gen::budget_pair(rng);
    const auto xy = disagreement(x, y);
    const auto yx = disagreement(y, x);
    if (xy.numerator == yx.numerator && xy.denominator == yx.denominator && xy.raw == yx.raw &&
        xy.display == yx.display) {
      ++symmetric;
    }
    const auto xx = disagreement(x, x);
    if (xx.raw == 0.0 && xx.numerator == 0 &&
        std::all_of(xx.deltas.begin(), xx.deltas.end(), [](const auto& kv) { return kv.second == 0; })) {
      ++identity;
    }
  }
  return {fixture_ok && symmetric == kMetricPairs && identity == kMetricPairs,
          fmt::format("fixture raw {} display {}; symmetric {}/{}; zero on identity {}/{}", fixture.raw_text(),
                      fixture.display, symmetric, kMetricPairs, identity, kMetricPairs)};
}

Outcome session_criterion() {
  Rng rng(kSeed + 4);
  int replayed = 0;
  std::size_t updates = 0;
  std::size_t matched = 0;
  std::size_t events = 0;
  std::string first_problem;
  for (int run = 0; run < kSessionSequences; ++run) {
    const std::string id = fmt::format("acc-{}", run);
    Session s(id, script::worked_baseline(), script::worked_pool());
    script::Shadow shadow(script::worked_baseline(), script::worked_pool());
    for (int i = 0; i < kSessionEvents; ++i) {
      const auto out = s.apply(script::random_client_message(rng, id));
      if (out.event) shadow.observe(*out.event);
      for (const auto& m : out.broadcast) {
        const auto* u = std::get_if<DisagreementPayload>(&m.payload);
        if (u == nullptr) continue;
        ++updates;
        const auto problem = shadow.check(*u);
        if (problem.empty()) ++matched;
        else if (first_problem.empty()) first_problem = problem;
      }
    }
    events += s.log().size();
    Session fresh(id, script::worked_baseline(), script::worked_pool());
    try {
      fresh.replay(s.log());
      if (fresh.canonical_state() == s.canonical_state()) ++replayed;
    } catch (const std::exception& e) {
      if (first_problem.empty()) first_problem = e.what();
    }
  }
  return {replayed == kSessionSequences && matched == updates && updates > 0,
          fmt::format("{}/{} sequences replay byte-identically ({} events); {}/{} updates match recomputation{}",
                      replayed, kSessionSequences, events, matched, updates,
                      first_problem.empty() ? "" : "; first problem: " + first_problem)};
}

Outcome trial_criterion() {
  const auto state = [] {
    TrialState t;
    t.camps = {{"C1", Camp::Conservative}, {"C2", Camp::Conservative}, {"C3", Camp::Conservative},
               {"L1", Camp::Liberal},      {"L2", Camp::Liberal},      {"L3", Camp::Liberal}};
    t.triads = {{"C1", "C2", "L1"}, {"L2", "L3", "C3"}};
    return t;
  };
  std::vector<TriadBallot> ballots{{"C1", "L1"}, {"C2", "C1"}, {"C3", "L2"}, {"L1", "C2"}, {"L2", "C3"}, {"L3", "L2"}};
  const std::map<UserId, Lean> want_labels{{"C1", Lean::StrongConservative}, {"C2", Lean::ModerateConservative},
                                           {"C3", Lean::Minority},           {"L1", Lean::Minority},
                                           {"L2", Lean::ModerateLiberal},    {"L3", Lean::StrongLiberal}};
  const std::vector<TrialPair> want_pairs{
      {PairKind::Strong, "C1", "L3"}, {PairKind::Moderate, "C2", "L2"}, {PairKind::Minority, "C3", "L1"}};
  const auto by_voter = [](const TriadBallot& a, const TriadBallot& b) { return a.voter < b.voter; };
  int orders = 0;
  int exact = 0;
  do {
    auto t = state();
    ++orders;
    if (run_trial_round2(t, ballots) == want_labels && pair_for_round3(t) == want_pairs) ++exact;
  } while (std::next_permutation(ballots.begin(), ballots.end(), by_voter));
  return {orders == 720 && exact == orders,
          fmt::format("{}/{} ballot orders give SC/SL/MC/ML/Minority labels and pairs (C1,L3) (C2,L2) (C3,L1)", exact,
                      orders)};
}

Outcome ingest_criterion() {
  Rng rng(kSeed + 5);
  int ok = 0;
  std::string first_problem;
  for (int i = 0; i < kBaselines; ++i) {
    const auto b = gen::baseline(rng);
    try {
      const auto text = render_baseline(b);
      if (parse_baseline(text) == b && render_baseline(parse_baseline(text)) == text) ++ok;
    } catch (const std::exception& e) {
      if (first_problem.empty()) first_problem = e.what();
    }
  }
  return {ok == kBaselines, fmt::format("{}/{} random baselines survive render then parse{}", ok, kBaselines,
                                        first_problem.empty() ? "" : "; first problem: " + first_problem)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"triadic winner density", [] { return density_criterion(Scheme::Triadic); }},
      {"hot-or-not winner density", [] { return density_criterion(Scheme::HotOrNot); }},
      {"mixture identity", mixture_criterion},
      {"winner moments", moments_criterion},
      {"condorcet winner is the median", condorcet_criterion},
      {"median wins a triad", triad_criterion},
      {"disagreement metric", metric_criterion},
      {"session replay and updates", session_criterion},
      {"trial labels and pairs", trial_criterion},
      {"ingest round trip", ingest_criterion},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %-32s %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", index - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
