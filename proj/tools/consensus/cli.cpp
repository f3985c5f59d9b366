#include "consensus/cli.hpp"

#include "consensus/budget.hpp"
#include "consensus/config.hpp"
#include "consensus/decimal.hpp"
#include "consensus/density.hpp"
#include "consensus/errors.hpp"
#include "consensus/ingest.hpp"
#include "consensus/server.hpp"
#include "consensus/voting.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <csignal>
#include <fstream>
#include <optional>
#include <ostream>
#include <pthread.h>
#include <sstream>
#include <thread>

namespace consensus::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulateArgs {
  std::string scheme = "triadic";
  std::uint64_t trials = 1'000'000;
  std::size_t bins = 50;
  std::uint64_t seed = 0;
  std::string out_path;
  std::optional<double> tolerance;
  unsigned threads = 0;
};

struct TournamentArgs {
  std::string population_path;
  std::optional<std::size_t> uniform;
  std::string scheme = "triadic";
  std::size_t k = 1;
  std::uint64_t seed = 0;
};

struct DiffArgs {
  std::string budget_a;
  std::string budget_b;
  std::string baseline;
};

struct ServeArgs {
  std::string config;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.trials == 0) throw UsageError("--trials must be positive");
  if (a.bins == 0) throw UsageError("--bins must be positive");
  if (a.trials < a.bins) throw UsageError("--trials must be at least --bins");

  SimulationOptions opt;
  opt.trials = a.trials;
  opt.bins = a.bins;
  opt.seed = a.seed;
  opt.threads = a.threads;

  FitReport report;
  std::ostringstream table;
  double tolerance = kDefaultDensityTolerance;
  if (a.scheme == "mixture") {
    tolerance = kDefaultMixtureTolerance;
    const MixtureSample m = verify_mixture_identity(opt);
    write_fit_table(table, m.hot_or_not.histogram, m.combined);
    report = m.fit;
  } else {
    const WinnerSample s = sample_winner_density(*parse_scheme(a.scheme), opt);
    write_fit_table(table, s.histogram, s.reference);
    report = s.fit;
  }
  if (a.tolerance) tolerance = *a.tolerance;

  if (!a.out_path.empty()) {
    std::ofstream file(a.out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw UsageError(fmt::format("cannot write '{}'", a.out_path));
    file << table.str();
    file.flush();
    if (!file) throw UsageError(fmt::format("write to '{}' failed", a.out_path));
  }
  const bool pass = report.l1 <= tolerance;
  out << summarize(report);
  out << fmt::format("tolerance  {:.6f}\nresult     {}\n", tolerance, pass ? "PASS" : "FAIL");
  return pass ? kOk : kToleranceFailure;
}

VoterPopulation read_population(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<double> positions;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    const std::string token = line.substr(first, last - first + 1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw ParseError(path, lineno, first + 1, fmt::format("'{}' is not a number", token));
    }
    if (!(v >= 0.0 && v <= 1.0)) throw ParseError(path, lineno, first + 1, fmt::format("{} outside [0, 1]", v));
    positions.push_back(v);
  }
  return line_population(std::move(positions));
}

int tournament(const TournamentArgs& a, std::ostream& out) {
  const auto scheme = parse_scheme(a.scheme);
  if (!scheme) throw UsageError(fmt::format("unknown scheme '{}'", a.scheme));
  if (a.k == 0) throw UsageError("--k must be at least 1");

  VoterPopulation pop = a.uniform ? uniform_population(*a.uniform, a.seed) : read_population(a.population_path);
  if (pop.size() < std::max(a.k, group_size(*scheme))) {
    throw UsageError(fmt::format("population of {} is smaller than max(k, group size {})", pop.size(),
                                 group_size(*scheme)));
  }
  Rng rng(stream_seed(a.seed, 1));
  const Tournament t = run_tournament(pop, *scheme, a.k, rng);

  const auto pos = [&](std::size_t i) { return format_fixed(std::get<double>(pop.voters[i])); };
  out << fmt::format("population {}\nscheme     {}\nstop at    {}\nseed       {}\n", pop.size(), to_string(*scheme),
                     a.k, a.seed);
  for (const auto& r : t.rounds) {
    const auto& p = r.participants;
    const std::string members =
        r.scheme == Scheme::Triadic
            ? fmt::format("{}@{} {}@{} {}@{}", p[0], pos(p[0]), p[1], pos(p[1]), p[2], pos(p[2]))
            : fmt::format("{}@{} vs {}@{} judged by {}@{}", p[0], pos(p[0]), p[1], pos(p[1]), p[2], pos(p[2]));
    out << fmt::format("stage {} {}: {} -> {}@{}\n", r.stage, to_string(r.scheme), members, r.winner, pos(r.winner));
  }
  out << fmt::format("rounds     {}\nstages     {}\n", t.rounds.size(), t.stages());
  for (auto w : t.winners) out << fmt::format("winner     {}@{}\n", w, pos(w));
  return kOk;
}

int diff(const DiffArgs& a, std::ostream& out) {
  const Baseline baseline = parse_baseline(read_file(a.baseline), a.baseline);
  const Budget ba = parse_budget(read_file(a.budget_a), baseline, a.budget_a);
  const Budget bb = parse_budget(read_file(a.budget_b), baseline, a.budget_b);
  const AmountMap ra = resolve_amounts(ba, baseline);
  const AmountMap rb = resolve_amounts(bb, baseline);
  const DisagreementReport report = disagreement(ra, rb);

  out << "category,budget_a,budget_b,delta\n";
  for (const auto& c : baseline.categories) {
    out << fmt::format("{},{},{},{}\n", c.id, ra.at(c.id), rb.at(c.id), report.deltas.at(c.id));
  }
  out << fmt::format("disagreement_raw,{}\n", report.raw_text());
  out << fmt::format("disagreement_display,{}\n", report.display);
  out << fmt::format("deficit_a,{}\n", deficit(ra));
  out << fmt::format("deficit_b,{}\n", deficit(rb));
  return kOk;
}

int serve(const ServeArgs& a, std::ostream& out) {
  const ServiceConfig config = load_config(a.config);

  // Signals are taken synchronously by this thread; block them before the
  // server spawns connection threads so none of those receive them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto server = Server::from_config(config);
  server->start();
  out << fmt::format("listening on {}\n", server->address()) << std::flush;

  std::thread loop([&] { server->run(); });
  int sig = 0;
  sigwait(&signals, &sig);
  out << fmt::format("signal {}, shutting down\n", sig) << std::flush;
  server->stop();
  loop.join();
  server.reset();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Budget consensus engine: voting simulations, tournaments, budget diffs and the collaboration service",
               "consensus"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo check of single-round winner densities");
  simulate_cmd->add_option("--scheme", sim.scheme, "triadic, hotornot or mixture")
      ->check(CLI::IsMember({"triadic", "hotornot", "mixture"}));
  simulate_cmd->add_option("--trials", sim.trials, "number of voting rounds");
  simulate_cmd->add_option("--bins", sim.bins, "histogram bins on [0, 1]");
  simulate_cmd->add_option("--seed", sim.seed, "root seed");
  simulate_cmd->add_option("--out", sim.out_path, "CSV table: bin_lo,bin_hi,empirical,analytic");
  simulate_cmd->add_option("--tolerance", sim.tolerance, "L1 gate (default 0.02, mixture 0.03)");
  simulate_cmd->add_option("--threads", sim.threads, "worker threads (0 = all cores); output does not depend on it");

  TournamentArgs tour;
  auto* tournament_cmd = app.add_subcommand("tournament", "Iterative elimination over a 1-D population");
  auto* pop_opt = tournament_cmd->add_option("--population", tour.population_path, "file with one position per line");
  auto* uni_opt = tournament_cmd->add_option("--uniform", tour.uniform, "draw N uniform positions");
  pop_opt->excludes(uni_opt);
  tournament_cmd->add_option("--scheme", tour.scheme, "triadic or hotornot");
  tournament_cmd->add_option("--k", tour.k, "stop once at most k proposals survive");
  tournament_cmd->add_option("--seed", tour.seed, "root seed");

  DiffArgs dif;
  auto* diff_cmd = app.add_subcommand("diff", "Per-category deltas and disagreement between two budgets");
  diff_cmd->add_option("budget_a", dif.budget_a)->required();
  diff_cmd->add_option("budget_b", dif.budget_b)->required();
  diff_cmd->add_option("--baseline", dif.baseline)->required();

  ServeArgs srv;
  auto* serve_cmd = app.add_subcommand("serve", "Run the collaboration service");
  serve_cmd->add_option("--config", srv.config, "JSON config file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*simulate_cmd) return simulate(sim, out);
    if (*tournament_cmd) {
      if (!*pop_opt && !*uni_opt) throw UsageError("one of --population or --uniform is required");
      return tournament(tour, out);
    }
    if (*diff_cmd) return diff(dif, out);
    if (*serve_cmd) return serve(srv, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace consensus::cli
