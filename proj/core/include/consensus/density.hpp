#pragma once

#include "consensus/voting.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace consensus {

/// Closed-form single-round winner densities for voters uniform on [0, 1].
enum class DensityModel {
  Uniform,         // f(x) = 1
  TriadicWinner,   // 6x(1 - x)
  HotOrNotWinner,  // 3x(1 - x) + 1/2
};

const char* to_string(DensityModel model);
DensityModel winner_model(Scheme scheme);

/// Throws DomainError for x outside [0, 1].
double analytic_density(DensityModel model, double x);

/// Closed-form integral of the density over [0, x].
double analytic_cdf(DensityModel model, double x);

/// Average density over [lo, hi], from the closed-form integral.
double analytic_bin_average(DensityModel model, double lo, double hi);

double analytic_mean(DensityModel model);
double analytic_variance(DensityModel model);

/// Winner densities for an arbitrary voter density f with CDF F. Only the
/// uniform case is a verification target; these exist so other
/// distributions can be explored.
struct VoterDistribution {
  std::function<double(double)> density;
  std::function<double(double)> cdf;
};

VoterDistribution uniform_voters();

/// 3! f(x) F(x) (1 - F(x)): probability density of x being the median of three.
double triadic_winner_density(const VoterDistribution& voters, double x);

/// 2 f(x) [ int_0^x f(y) (1 - F((x+y)/2)) dy + int_x^1 f(y) F((x+y)/2) dy ],
/// evaluated by composite Simpson quadrature.
double hot_or_not_winner_density(const VoterDistribution& voters, double x, int intervals = 2000);

/// Composite Simpson's rule; `intervals` is rounded up to an even count.
double simpson(const std::function<double(double)>& f, double lo, double hi, int intervals);

/// Equal-width histogram on [0, 1]. The value 1.0 falls in the last bin.
class Histogram {
 public:
  explicit Histogram(std::size_t bins);

  std::size_t bins() const { return counts_.size(); }
  std::uint64_t total() const { return total_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  double lo(std::size_t bin) const;
  double hi(std::size_t bin) const;
  std::size_t bin_of(double x) const;

  /// count * B / N; integrates to exactly 1 over [0, 1].
  double density(std::size_t bin) const;

  void add(double x);
  void merge(const Histogram& other);

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct Moments {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations

  void add(double x);
  void merge(const Moments& other);
  double variance() const;          // sample variance
  double mean_stderr() const;
  /// Standard error of the sample variance, from the fourth central moment
  /// of the analytic model.
  double variance_stderr(DensityModel model) const;
};

struct SimulationOptions {
  std::uint64_t trials = 1'000'000;
  std::size_t bins = 50;
  std::uint64_t seed = 0;
  /// 0 picks the hardware concurrency. Results do not depend on it.
  unsigned threads = 0;
};

/// Trials are split into fixed batches of this size; batch i draws from
/// stream_seed(seed, i).
inline constexpr std::uint64_t kTrialBatch = 1u << 16;

struct FitReport {
  std::string scheme;
  std::uint64_t trials = 0;
  std::size_t bins = 0;
  std::uint64_t seed = 0;
  double l1 = 0.0;          // (1/B) sum |empirical - reference|
  double max_abs_z = 0.0;   // worst per-bin z-score against the reference
  double mean = 0.0;
  double variance = 0.0;
  double analytic_mean = 0.0;
  double analytic_variance = 0.0;
  double mean_stderr = 0.0;
  double variance_stderr = 0.0;
};

struct WinnerSample {
  Histogram histogram;
  Moments moments;
  std::vector<double> reference;  // per-bin reference density
  FitReport fit;
};

/// One round per trial over three independent uniform positions. Triadic
/// records the round winner; Hot-or-Not treats the first two draws as
/// candidates and the third as the judge.
WinnerSample sample_winner_density(Scheme scheme, const SimulationOptions& options);

struct MixtureSample {
  WinnerSample triadic;
  WinnerSample hot_or_not;
  std::vector<double> combined;  // 0.5 * empirical triadic + 0.5 * uniform
  FitReport fit;                 // hot-or-not empirical against `combined`
};

/// Runs both samplers on independent streams derived from options.seed and
/// compares empirical Hot-or-Not against half empirical Triadic plus half
/// uniform.
MixtureSample verify_mixture_identity(const SimulationOptions& options);

struct MomentReport {
  double mean = 0.0;
  double variance = 0.0;
  double mean_stderr = 0.0;
  double variance_stderr = 0.0;
};

MomentReport moment_report(Scheme scheme, std::uint64_t trials, std::uint64_t seed, unsigned threads = 0);

/// L1 distance (1/B) sum |a_i - b_i|.
double l1_distance(const std::vector<double>& a, const std::vector<double>& b);

/// bin_lo,bin_hi,empirical,analytic rows with a header line.
void write_fit_table(std::ostream& out, const Histogram& empirical, const std::vector<double>& reference);

/// Multi-line human-readable summary.
std::string summarize(const FitReport& report);

}  // namespace consensus
