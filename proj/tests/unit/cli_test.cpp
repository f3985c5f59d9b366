#include "consensus/cli.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

namespace cli = consensus::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double winner_position(const std::string& out) {
  static const std::regex re(R"(winner\s+\d+@([0-9.]+))");
  std::smatch m;
  if (!std::regex_search(out, m, re)) throw std::runtime_error("no winner line in:\n" + out);
  return std::stod(m[1]);
}

const std::string kData = CONSENSUS_TEST_DATA;

}  // namespace

TEST(CliSimulate, PassesAtDefaultTolerance) {
  const auto r = run({"simulate", "--scheme", "triadic", "--trials", "1000000", "--bins", "50", "--seed", "7"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("result     PASS"), std::string::npos) << r.out;
}

TEST(CliSimulate, ToleranceFailureExitsOne) {
  const auto r = run({"simulate", "--scheme", "hotornot", "--trials", "1000", "--bins", "50", "--tolerance", "0.0001"});
  EXPECT_EQ(r.code, cli::kToleranceFailure);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(CliSimulate, UsageErrors) {
  EXPECT_EQ(run({"simulate", "--trials", "0"}).code, cli::kUsageError);
  EXPECT_EQ(run({"simulate", "--scheme", "borda"}).code, cli::kUsageError);
  EXPECT_EQ(run({"simulate", "--bins", "0"}).code, cli::kUsageError);
  EXPECT_EQ(run({"simulate", "--trials", "-5"}).code, cli::kUsageError);
  EXPECT_EQ(run({"simulate", "--trials", "10", "--bins", "50"}).code, cli::kUsageError);
  EXPECT_EQ(run({"simulate", "--out", "/nonexistent-dir/x.csv", "--trials", "1000", "--bins", "10"}).code,
            cli::kUsageError);
  EXPECT_EQ(run({}).code, cli::kUsageError);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsageError);
}

TEST(CliSimulate, OutputFilesAreByteIdentical) {
  std::random_device rd;
  const auto dir = fs::temp_directory_path() / ("consensus-cli-" + std::to_string(rd()));
  fs::create_directories(dir);
  for (const std::string scheme : {"triadic", "hotornot", "mixture"}) {
    const auto a = dir / (scheme + "-a.csv");
    const auto b = dir / (scheme + "-b.csv");
    const auto ra = run({"simulate", "--scheme", scheme, "--trials", "200000", "--bins", "25", "--seed", "3", "--out",
                         a.string(), "--threads", "1"});
    const auto rb = run({"simulate", "--scheme", scheme, "--trials", "200000", "--bins", "25", "--seed", "3", "--out",
                         b.string(), "--threads", "3"});
    EXPECT_EQ(ra.code, cli::kOk) << ra.err;
    EXPECT_EQ(ra.out, rb.out);
    const auto text = slurp(a);
    EXPECT_EQ(text, slurp(b));
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 26);
  }
  fs::remove_all(dir);
}

TEST(CliTournament, StopCountAtPopulationMeansNoRounds) {
  const auto r = run({"tournament", "--uniform", "81", "--scheme", "triadic", "--k", "81"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("rounds     0"), std::string::npos) << r.out;
}

TEST(CliTournament, ThreeVotersMedianWins) {
  static const std::regex stage(R"(stage 1 triadic: \d+@([0-9.]+) \d+@([0-9.]+) \d+@([0-9.]+) -> \d+@([0-9.]+))");
  for (int seed = 0; seed < 50; ++seed) {
    const auto r = run({"tournament", "--uniform", "3", "--scheme", "triadic", "--k", "1", "--seed",
                        std::to_string(seed)});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    std::smatch m;
    ASSERT_TRUE(std::regex_search(r.out, m, stage)) << r.out;
    std::vector<double> xs{std::stod(m[1]), std::stod(m[2]), std::stod(m[3])};
    std::sort(xs.begin(), xs.end());
    EXPECT_EQ(std::stod(m[4]), xs[1]);
    EXPECT_EQ(winner_position(r.out), xs[1]);
  }
}

TEST(CliTournament, WinnersConcentrateCentrally) {
  // Sample variance of the winner over 200 seeds sits below the uniform 1/12.
  std::vector<double> w;
  for (int seed = 0; seed < 200; ++seed) {
    const auto r = run({"tournament", "--uniform", "81", "--scheme", "triadic", "--k", "1", "--seed",
                        std::to_string(seed)});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    w.push_back(winner_position(r.out));
  }
  double mean = 0;
  for (double x : w) mean += x;
  mean /= static_cast<double>(w.size());
  double var = 0;
  for (double x : w) var += (x - mean) * (x - mean);
  var /= static_cast<double>(w.size() - 1);
  EXPECT_LT(var, 1.0 / 12.0);
}

TEST(CliTournament, PopulationFileAndErrors) {
  const auto r = run({"tournament", "--population", kData + "/population_line.txt", "--scheme", "hotornot"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("population 9"), std::string::npos);
  const auto again = run({"tournament", "--population", kData + "/population_line.txt", "--scheme", "hotornot"});
  EXPECT_EQ(r.out, again.out);
  EXPECT_EQ(run({"tournament", "--uniform", "2", "--scheme", "triadic"}).code, cli::kUsageError);
  EXPECT_EQ(run({"tournament", "--uniform", "5", "--population", "x"}).code, cli::kUsageError);
  EXPECT_EQ(run({"tournament", "--population", kData + "/missing.txt"}).code, cli::kUsageError);
  EXPECT_EQ(run({"tournament"}).code, cli::kUsageError);
}

TEST(CliDiff, WorkedFixture) {
  const auto r = run({"diff", kData + "/disagreement/budget_a.csv", kData + "/disagreement/budget_b.csv",
                      "--baseline", kData + "/disagreement/baseline.csv"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("disagreement_raw,0.109091\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("disagreement_display,>10%\n"), std::string::npos);
  EXPECT_NE(r.out.find("Taxes,1200,1400,-200\n"), std::string::npos);
}

TEST(CliDiff, IdenticalFilesAreZero) {
  const auto r = run({"diff", kData + "/disagreement/budget_b.csv", kData + "/disagreement/budget_b.csv",
                      "--baseline", kData + "/disagreement/baseline.csv"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.out.find("disagreement_raw,0.000000\n"), std::string::npos);
  EXPECT_NE(r.out.find("disagreement_display,0.000000\n"), std::string::npos);
}

TEST(CliDiff, MismatchedCategoriesFail) {
  const auto r = run({"diff", kData + "/disagreement/budget_a.csv", kData + "/disagreement/budget_mismatch.csv",
                      "--baseline", kData + "/disagreement/baseline.csv"});
  EXPECT_EQ(r.code, cli::kUsageError);
  EXPECT_NE(r.err.find("Education"), std::string::npos) << r.err;
}

TEST(CliServe, BadConfigNamesKey) {
  std::random_device rd;
  const auto path = fs::temp_directory_path() / ("consensus-bad-" + std::to_string(rd()) + ".json");
  {
    std::ofstream out(path);
    out << R"({"listen":"127.0.0.1:0","bogus_key":1})";
  }
  const auto r = run({"serve", "--config", path.string()});
  EXPECT_EQ(r.code, cli::kUsageError);
  EXPECT_NE(r.err.find("bogus_key"), std::string::npos) << r.err;
  fs::remove(path);
}
