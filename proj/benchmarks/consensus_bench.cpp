#include <consensus/budget.hpp>
#include <consensus/density.hpp>
#include <consensus/session.hpp>
#include <consensus/voting.hpp>

#include <benchmark/benchmark.h>

#include <string>

namespace {

using namespace consensus;

void BM_WinnerSampler(benchmark::State& state) {
  const auto scheme = state.range(0) == 0 ? Scheme::Triadic : Scheme::HotOrNot;
  const auto trials = static_cast<std::uint64_t>(state.range(1));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto s = sample_winner_density(scheme, {trials, 50, seed++, 1});
    benchmark::DoNotOptimize(s.fit.l1);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(1));
  state.SetLabel(to_string(scheme));
}
BENCHMARK(BM_WinnerSampler)->Args({0, 1 << 20})->Args({1, 1 << 20})->Unit(benchmark::kMillisecond);

void BM_Disagreement(benchmark::State& state) {
  AmountMap a;
  AmountMap b;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    const auto key = "category-" + std::to_string(i);
    a[key] = -1000 - i;
    b[key] = -1000 + i;
  }
  for (auto _ : state) {
    auto r = disagreement(a, b);
    benchmark::DoNotOptimize(r.numerator);
  }
}
BENCHMARK(BM_Disagreement)->Arg(12)->Arg(200);

void BM_CondorcetWinner(benchmark::State& state) {
  const auto pop = uniform_population(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(condorcet_winner(pop));
}
BENCHMARK(BM_CondorcetWinner)->Arg(15)->Arg(101);

void BM_Tournament(benchmark::State& state) {
  const auto pop = uniform_population(static_cast<std::size_t>(state.range(0)), 5);
  Rng rng(9);
  for (auto _ : state) {
    auto t = run_tournament(pop, Scheme::Triadic, 1, rng);
    benchmark::DoNotOptimize(t.winners.data());
  }
}
BENCHMARK(BM_Tournament)->Arg(81)->Arg(6561);

void BM_SessionAdjust(benchmark::State& state) {
  Baseline base;
  base.id = base.name = "bench";
  for (int i = 0; i < 12; ++i) {
    const auto id = "c" + std::to_string(i);
    base.categories.push_back({id, id, CategoryKind::Expense, ""});
    base.amounts[id] = -1000;
  }
  Session s("bench", base, {});
  s.apply(make_hello("bench", "a"));
  s.apply(make_hello("bench", "b"));
  Dollars amount = 0;
  for (auto _ : state) {
    auto out = s.apply(make_adjust("bench", "a", "c3", -(amount++ % 997)));
    benchmark::DoNotOptimize(out.accepted);
  }
}
BENCHMARK(BM_SessionAdjust);

}  // namespace

BENCHMARK_MAIN();
