#include "consensus/density.hpp"

#include "consensus/decimal.hpp"
#include "consensus/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

namespace consensus {

const char* to_string(DensityModel model) {
  switch (model) {
    case DensityModel::Uniform: return "uniform";
    case DensityModel::TriadicWinner: return "triadic";
    case DensityModel::HotOrNotWinner: return "hotornot";
  }
  return "?";
}

DensityModel winner_model(Scheme scheme) {
  return scheme == Scheme::Triadic ? DensityModel::TriadicWinner : DensityModel::HotOrNotWinner;
}

namespace {

void check_unit(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError(fmt::format("density argument {} outside [0, 1]", x));
}

}  // namespace

double analytic_density(DensityModel model, double x) {
  check_unit(x);
  switch (model) {
    case DensityModel::Uniform: return 1.0;
    case DensityModel::TriadicWinner: return 6.0 * x * (1.0 - x);
    case DensityModel::HotOrNotWinner: return 3.0 * x * (1.0 - x) + 0.5;
  }
  return 0.0;
}

double analytic_cdf(DensityModel model, double x) {
  check_unit(x);
  const double triadic = x * x * (3.0 - 2.0 * x);  // 3x^2 - 2x^3
  switch (model) {
    case DensityModel::Uniform: return x;
    case DensityModel::TriadicWinner: return triadic;
    case DensityModel::HotOrNotWinner: return 0.5 * triadic + 0.5 * x;
  }
  return 0.0;
}

double analytic_bin_average(DensityModel model, double lo, double hi) {
  if (!(hi > lo)) throw DomainError("empty bin");
  return (analytic_cdf(model, hi) - analytic_cdf(model, lo)) / (hi - lo);
}

double analytic_mean(DensityModel) { return 0.5; }

double analytic_variance(DensityModel model) {
  // Triadic winner density is Beta(2, 2): variance 1/20. Uniform 1/12.
  switch (model) {
    case DensityModel::Uniform: return 1.0 / 12.0;
    case DensityModel::TriadicWinner: return 1.0 / 20.0;
    case DensityModel::HotOrNotWinner: return 0.5 / 20.0 + 0.5 / 12.0;
  }
  return 0.0;
}

namespace {

// Central fourth moments: uniform 1/80, Beta(2,2) 3/560.
double analytic_fourth_moment(DensityModel model) {
  switch (model) {
    case DensityModel::Uniform: return 1.0 / 80.0;
    case DensityModel::TriadicWinner: return 3.0 / 560.0;
    case DensityModel::HotOrNotWinner: return 0.5 / 80.0 + 0.5 * 3.0 / 560.0;
  }
  return 0.0;
}

}  // namespace

VoterDistribution uniform_voters() {
  return {[](double) { return 1.0; }, [](double x) { return std::clamp(x, 0.0, 1.0); }};
}

double triadic_winner_density(const VoterDistribution& voters, double x) {
  check_unit(x);
  const double F = voters.cdf(x);
  return 6.0 * voters.density(x) * F * (1.0 - F);
}

double simpson(const std::function<double(double)>& f, double lo, double hi, int intervals) {
  if (intervals < 2) intervals = 2;
  if (intervals % 2 != 0) ++intervals;
  const double h = (hi - lo) / intervals;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) sum += f(lo + i * h) * (i % 2 != 0 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

double hot_or_not_winner_density(const VoterDistribution& voters, double x, int intervals) {
  check_unit(x);
  // x beats y when the judge falls on x's side of their midpoint.
  const auto left = [&](double y) { return voters.density(y) * (1.0 - voters.cdf((x + y) / 2.0)); };
  const auto right = [&](double y) { return voters.density(y) * voters.cdf((x + y) / 2.0); };
  double total = 0.0;
  if (x > 0.0) total += simpson(left, 0.0, x, intervals);
  if (x < 1.0) total += simpson(right, x, 1.0, intervals);
  return 2.0 * voters.density(x) * total;
}

Histogram::Histogram(std::size_t bins) : counts_(bins, 0) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
}

double Histogram::lo(std::size_t bin) const { return static_cast<double>(bin) / static_cast<double>(bins()); }
double Histogram::hi(std::size_t bin) const { return static_cast<double>(bin + 1) / static_cast<double>(bins()); }

std::size_t Histogram::bin_of(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError(fmt::format("histogram value {} outside [0, 1]", x));
  const auto b = static_cast<std::size_t>(x * static_cast<double>(bins()));
  return std::min(b, bins() - 1);
}

double Histogram::density(std::size_t bin) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(counts_[bin]) * static_cast<double>(bins()) / static_cast<double>(total_);
}

void Histogram::add(double x) {
  ++counts_[bin_of(x)];
  ++total_;
}

void Histogram::merge(const Histogram& other) {
  if (other.bins() != bins()) throw ValidationError("histogram bin counts differ");
  for (std::size_t i = 0; i < bins(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

void Moments::add(double x) {
  ++count;
  const double d = x - mean;
  mean += d / static_cast<double>(count);
  m2 += d * (x - mean);
}

void Moments::merge(const Moments& o) {
  if (o.count == 0) return;
  if (count == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(count + o.count);
  const double d = o.mean - mean;
  mean += d * static_cast<double>(o.count) / n;
  m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) / n;
  count += o.count;
}

double Moments::variance() const { return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1); }

double Moments::mean_stderr() const {
  return count < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(count));
}

double Moments::variance_stderr(DensityModel model) const {
  if (count < 2) return 0.0;
  const double s2 = analytic_variance(model);
  return std::sqrt((analytic_fourth_moment(model) - s2 * s2) / static_cast<double>(count));
}

namespace {

struct Batch {
  Histogram histogram;
  Moments moments;
};

double one_trial(Scheme scheme, Rng& rng) {
  const double a = rng.uniform01();
  const double b = rng.uniform01();
  const double c = rng.uniform01();
  return scheme == Scheme::Triadic ? line::triadic_winner(a, b, c, rng) : line::hot_or_not_winner(a, b, c, rng);
}

Batch run_batches(Scheme scheme, const SimulationOptions& opt) {
  if (opt.bins < 1 || opt.trials < opt.bins) {
    throw ValidationError(fmt::format("need trials >= bins >= 1 (trials {}, bins {})", opt.trials, opt.bins));
  }
  const std::uint64_t batches = (opt.trials + kTrialBatch - 1) / kTrialBatch;
  std::vector<Batch> parts(batches, Batch{Histogram(opt.bins), Moments{}});

  std::atomic<std::uint64_t> next{0};
  const auto worker = [&] {
    for (std::uint64_t b = next++; b < batches; b = next++) {
      Rng rng(stream_seed(opt.seed, b));
      const std::uint64_t n = std::min(kTrialBatch, opt.trials - b * kTrialBatch);
      Batch& part = parts[b];
      for (std::uint64_t i = 0; i < n; ++i) {
        const double w = one_trial(scheme, rng);
        part.histogram.add(w);
        part.moments.add(w);
      }
    }
  };

  unsigned threads = opt.threads != 0 ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, batches));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  Batch total{Histogram(opt.bins), Moments{}};
  for (const auto& part : parts) {
    total.histogram.merge(part.histogram);
    total.moments.merge(part.moments);
  }
  return total;
}

double max_abs_z(const Histogram& h, const std::vector<double>& reference) {
  const double n = static_cast<double>(h.total());
  const double bins = static_cast<double>(h.bins());
  double worst = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double p = std::clamp(reference[i] / bins, 0.0, 1.0);
    const double sd = std::sqrt(n * p * (1.0 - p));
    if (sd <= 0.0) continue;
    worst = std::max(worst, std::fabs((static_cast<double>(h.counts()[i]) - n * p) / sd));
  }
  return worst;
}

std::vector<double> empirical(const Histogram& h) {
  std::vector<double> out(h.bins());
  for (std::size_t i = 0; i < h.bins(); ++i) out[i] = h.density(i);
  return out;
}

FitReport fit(std::string scheme, const SimulationOptions& opt, const Histogram& h, const Moments& m,
              const std::vector<double>& reference, DensityModel model) {
  FitReport r;
  r.scheme = std::move(scheme);
  r.trials = opt.trials;
  r.bins = opt.bins;
  r.seed = opt.seed;
  r.l1 = l1_distance(empirical(h), reference);
  r.max_abs_z = max_abs_z(h, reference);
  r.mean = m.mean;
  r.variance = m.variance();
  r.analytic_mean = analytic_mean(model);
  r.analytic_variance = analytic_variance(model);
  r.mean_stderr = m.mean_stderr();
  r.variance_stderr = m.variance_stderr(model);
  return r;
}

}  // namespace

WinnerSample sample_winner_density(Scheme scheme, const SimulationOptions& options) {
  Batch total = run_batches(scheme, options);
  const DensityModel model = winner_model(scheme);
  std::vector<double> reference(options.bins);
  for (std::size_t i = 0; i < options.bins; ++i) {
    reference[i] = analytic_bin_average(model, total.histogram.lo(i), total.histogram.hi(i));
  }
  FitReport report = fit(to_string(scheme), options, total.histogram, total.moments, reference, model);
  return WinnerSample{std::move(total.histogram), total.moments, std::move(reference), std::move(report)};
}

MixtureSample verify_mixture_identity(const SimulationOptions& options) {
  SimulationOptions tri_opt = options;
  tri_opt.seed = stream_seed(options.seed, 0x7472690000000000ULL);
  SimulationOptions hon_opt = options;
  hon_opt.seed = stream_seed(options.seed, 0x686f6e0000000000ULL);

  MixtureSample out{sample_winner_density(Scheme::Triadic, tri_opt),
                    sample_winner_density(Scheme::HotOrNot, hon_opt),
                    {},
                    {}};
  out.combined.resize(options.bins);
  for (std::size_t i = 0; i < options.bins; ++i) {
    out.combined[i] = 0.5 * out.triadic.histogram.density(i) + 0.5 * 1.0;
  }
  out.fit = fit("mixture", options, out.hot_or_not.histogram, out.hot_or_not.moments, out.combined,
                DensityModel::HotOrNotWinner);
  return out;
}

MomentReport moment_report(Scheme scheme, std::uint64_t trials, std::uint64_t seed, unsigned threads) {
  if (trials < 2) throw ValidationError("moment report needs at least two trials");
  SimulationOptions opt;
  opt.trials = trials;
  opt.bins = 1;
  opt.seed = seed;
  opt.threads = threads;
  const Batch total = run_batches(scheme, opt);
  return {total.moments.mean, total.moments.variance(), total.moments.mean_stderr(),
          total.moments.variance_stderr(winner_model(scheme))};
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw ValidationError("L1 distance needs equal, non-empty bin vectors");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

void write_fit_table(std::ostream& out, const Histogram& h, const std::vector<double>& reference) {
  out << "bin_lo,bin_hi,empirical,analytic\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    out << format_fixed(h.lo(i)) << ',' << format_fixed(h.hi(i)) << ',' << format_fixed(h.density(i)) << ','
        << format_fixed(reference[i]) << '\n';
  }
}

std::string summarize(const FitReport& r) {
  return fmt::format(
      "scheme     {}\n"
      "trials     {}\n"
      "bins       {}\n"
      "seed       {}\n"
      "l1         {:.6f}\n"
      "max |z|    {:.3f}\n"
      "mean       {:.6f} (analytic {:.6f}, se {:.6f})\n"
      "variance   {:.6f} (analytic {:.6f}, se {:.6f})\n",
      r.scheme, r.trials, r.bins, r.seed, r.l1, r.max_abs_z, r.mean, r.analytic_mean, r.mean_stderr, r.variance,
      r.analytic_variance, r.variance_stderr);
}

}  // namespace consensus
