#include <consensus/density.hpp>
#include <consensus/errors.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace consensus;

TEST(AnalyticDensity, PointValues) {
  EXPECT_DOUBLE_EQ(analytic_density(DensityModel::TriadicWinner, 0.5), 1.5);
  EXPECT_DOUBLE_EQ(analytic_density(DensityModel::TriadicWinner, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(analytic_density(DensityModel::HotOrNotWinner, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(analytic_density(DensityModel::HotOrNotWinner, 0.5), 1.25);
  EXPECT_DOUBLE_EQ(analytic_density(DensityModel::HotOrNotWinner, 0.25), 1.0625);
  EXPECT_DOUBLE_EQ(analytic_density(DensityModel::Uniform, 0.3), 1.0);
}

TEST(AnalyticDensity, OutsideUnitIntervalIsDomainError) {
  EXPECT_THROW(analytic_density(DensityModel::TriadicWinner, -0.01), DomainError);
  EXPECT_THROW(analytic_density(DensityModel::HotOrNotWinner, 1.01), DomainError);
  EXPECT_THROW(analytic_density(DensityModel::Uniform, std::nan("")), DomainError);
}

TEST(AnalyticDensity, IntegratesToOne) {
  for (auto m : {DensityModel::Uniform, DensityModel::TriadicWinner, DensityModel::HotOrNotWinner}) {
    EXPECT_NEAR(simpson([m](double x) { return analytic_density(m, x); }, 0, 1, 1000), 1.0, 1e-9);
    EXPECT_NEAR(analytic_cdf(m, 1.0), 1.0, 1e-15);
    EXPECT_EQ(analytic_cdf(m, 0.0), 0.0);
  }
}

TEST(AnalyticDensity, Moments) {
  EXPECT_DOUBLE_EQ(analytic_mean(DensityModel::TriadicWinner), 0.5);
  EXPECT_DOUBLE_EQ(analytic_mean(DensityModel::HotOrNotWinner), 0.5);
  EXPECT_NEAR(analytic_variance(DensityModel::TriadicWinner), 0.05, 1e-15);
  EXPECT_NEAR(analytic_variance(DensityModel::HotOrNotWinner), 1.0 / 15.0, 1e-15);
  EXPECT_NEAR(analytic_variance(DensityModel::Uniform), 1.0 / 12.0, 1e-15);
  // Numeric check of the closed forms.
  const auto var = [](DensityModel m) {
    return simpson([m](double x) { return (x - 0.5) * (x - 0.5) * analytic_density(m, x); }, 0, 1, 1000);
  };
  EXPECT_NEAR(var(DensityModel::TriadicWinner), 0.05, 1e-10);
  EXPECT_NEAR(var(DensityModel::HotOrNotWinner), 0.0666666666667, 1e-10);
}

TEST(AnalyticDensity, MixtureIdentityHoldsPointwise) {
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    EXPECT_NEAR(analytic_density(DensityModel::HotOrNotWinner, x),
                0.5 * analytic_density(DensityModel::TriadicWinner, x) + 0.5, 1e-15);
  }
}

TEST(AnalyticDensity, BoundaryBinAverages) {
  EXPECT_NEAR(analytic_bin_average(DensityModel::TriadicWinner, 0.0, 0.02), 0.0592, 1e-12);
  EXPECT_NEAR(analytic_bin_average(DensityModel::HotOrNotWinner, 0.0, 0.02), 0.5296, 1e-12);
  EXPECT_NEAR(analytic_bin_average(DensityModel::TriadicWinner, 0.98, 1.0), 0.0592, 1e-12);
}

TEST(GeneralDensity, UniformVotersReproduceClosedForms) {
  const auto f = uniform_voters();
  for (int i = 0; i <= 50; ++i) {
    const double x = i / 50.0;
    EXPECT_NEAR(triadic_winner_density(f, x), analytic_density(DensityModel::TriadicWinner, x), 1e-12);
    EXPECT_NEAR(hot_or_not_winner_density(f, x), analytic_density(DensityModel::HotOrNotWinner, x), 1e-6);
  }
}

TEST(GeneralDensity, NonUniformVotersIntegrateToOne) {
  // f(x) = 2x
  const VoterDistribution f{[](double x) { return 2 * x; }, [](double x) { return x * x; }};
  EXPECT_NEAR(simpson([&](double x) { return triadic_winner_density(f, x); }, 0, 1, 400), 1.0, 1e-9);
  EXPECT_NEAR(simpson([&](double x) { return hot_or_not_winner_density(f, x, 400); }, 0, 1, 400), 1.0, 1e-5);
}

TEST(Histogram, BinsAndDensity) {
  Histogram h(4);
  h.add(0.0);
  h.add(0.25);
  h.add(0.999);
  h.add(1.0);
  EXPECT_EQ(h.counts(), (std::vector<std::uint64_t>{1, 1, 0, 2}));
  EXPECT_DOUBLE_EQ(h.density(3), 2.0);
  EXPECT_DOUBLE_EQ(h.lo(1), 0.25);
  EXPECT_DOUBLE_EQ(h.hi(3), 1.0);
  EXPECT_THROW(h.add(1.5), DomainError);
  EXPECT_THROW(Histogram(0), ValidationError);
}

TEST(Moments, MergeEqualsSequential) {
  Rng rng(1);
  Moments all;
  Moments a;
  Moments b;
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform01();
    all.add(x);
    (i < 3000 ? a : b).add(x);
  }
  a.merge(b);
  EXPECT_EQ(a.count, all.count);
  EXPECT_NEAR(a.mean, all.mean, 1e-14);
  EXPECT_NEAR(a.variance(), all.variance(), 1e-14);
}

TEST(Sampler, RejectsBadParameters) {
  EXPECT_THROW(sample_winner_density(Scheme::Triadic, {0, 50, 0, 1}), ValidationError);
  EXPECT_THROW(sample_winner_density(Scheme::Triadic, {100, 0, 0, 1}), ValidationError);
  EXPECT_THROW(sample_winner_density(Scheme::Triadic, {10, 50, 0, 1}), ValidationError);
}

TEST(Sampler, ThreadCountDoesNotChangeResult) {
  const SimulationOptions one{300'000, 50, 5, 1};
  const SimulationOptions four{300'000, 50, 5, 4};
  for (auto scheme : {Scheme::Triadic, Scheme::HotOrNot}) {
    const auto a = sample_winner_density(scheme, one);
    const auto b = sample_winner_density(scheme, four);
    EXPECT_EQ(a.histogram.counts(), b.histogram.counts());
    EXPECT_EQ(a.moments.mean, b.moments.mean);
    EXPECT_EQ(a.moments.m2, b.moments.m2);
    EXPECT_EQ(a.fit.l1, b.fit.l1);
  }
}

TEST(Sampler, SameSeedSameBits) {
  const SimulationOptions o{100'000, 20, 77, 2};
  const auto a = sample_winner_density(Scheme::Triadic, o);
  const auto b = sample_winner_density(Scheme::Triadic, o);
  EXPECT_EQ(a.histogram.counts(), b.histogram.counts());
  auto o2 = o;
  o2.seed = 78;
  EXPECT_NE(sample_winner_density(Scheme::Triadic, o2).histogram.counts(), a.histogram.counts());
}

TEST(Sampler, TotalsAndReference) {
  const auto s = sample_winner_density(Scheme::HotOrNot, {70'001, 50, 3, 1});
  EXPECT_EQ(s.histogram.total(), 70'001u);
  EXPECT_EQ(s.moments.count, 70'001u);
  ASSERT_EQ(s.reference.size(), 50u);
  EXPECT_NEAR(s.reference[0], 0.5296, 1e-12);
  double sum = 0;
  for (std::size_t i = 0; i < 50; ++i) sum += s.histogram.density(i);
  EXPECT_NEAR(sum / 50, 1.0, 1e-12);
}

TEST(Sampler, ConvergesAcrossSeeds) {
  // L1 at N=1e5, B=20 has expected value near 0.01; 0.03 leaves a wide margin.
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto t = sample_winner_density(Scheme::Triadic, {100'000, 20, seed, 1});
    const auto h = sample_winner_density(Scheme::HotOrNot, {100'000, 20, seed + 1000, 1});
    ok += t.fit.l1 <= 0.03 && h.fit.l1 <= 0.03;
  }
  EXPECT_GE(ok, 95);
}

TEST(Sampler, ErrorShrinksWithTrials) {
  double small = 0;
  double large = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    small += sample_winner_density(Scheme::Triadic, {20'000, 20, seed, 1}).fit.l1;
    large += sample_winner_density(Scheme::Triadic, {320'000, 20, seed, 1}).fit.l1;
  }
  // sqrt(16) = 4x expected reduction; require at least 2x.
  EXPECT_LT(large * 2, small);
}

TEST(Mixture, SingleBinIsExact) {
  const auto m = verify_mixture_identity({1000, 1, 9, 1});
  EXPECT_EQ(m.fit.l1, 0.0);
  ASSERT_EQ(m.combined.size(), 1u);
  EXPECT_DOUBLE_EQ(m.combined[0], 1.0);
}

TEST(Mixture, StreamsAreIndependent) {
  const auto m = verify_mixture_identity({100'000, 20, 4, 1});
  EXPECT_NE(m.triadic.histogram.counts(), m.hot_or_not.histogram.counts());
  EXPECT_LT(m.fit.l1, 0.05);
}

TEST(MomentReport, WithinFourStandardErrors) {
  for (auto scheme : {Scheme::Triadic, Scheme::HotOrNot}) {
    const auto r = moment_report(scheme, 200'000, 21, 1);
    const auto model = winner_model(scheme);
    EXPECT_LT(std::fabs(r.mean - 0.5), 4 * r.mean_stderr);
    EXPECT_LT(std::fabs(r.variance - analytic_variance(model)), 4 * r.variance_stderr);
    EXPECT_GT(r.variance_stderr, 0.0);
  }
}

TEST(FitTable, HeaderAndRows) {
  const auto s = sample_winner_density(Scheme::Triadic, {1000, 4, 1, 1});
  std::ostringstream out;
  write_fit_table(out, s.histogram, s.reference);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "bin_lo,bin_hi,empirical,analytic");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
  EXPECT_NE(out.str().find("0.000000,0.250000,"), std::string::npos);
}

TEST(L1Distance, Basic) {
  EXPECT_DOUBLE_EQ(l1_distance({1, 2}, {1, 4}), 1.0);
  EXPECT_THROW(l1_distance({1}, {1, 2}), ValidationError);
}

TEST(Sampler, BoundaryBinsSeparateTheSchemes) {
  const auto t = sample_winner_density(Scheme::Triadic, {1'000'000, 50, 17, 0});
  const auto h = sample_winner_density(Scheme::HotOrNot, {1'000'000, 50, 18, 0});
  for (std::size_t bin : {std::size_t{0}, std::size_t{49}}) {
    EXPECT_LT(t.histogram.density(bin), 0.25);
    // Bin average of 3x(1-x)+1/2 over [0, 0.02] is 0.5296.
    EXPECT_NEAR(h.histogram.density(bin), 0.5296, 0.05);
  }
}
