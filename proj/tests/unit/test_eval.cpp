#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "brdfnqm/errors.hpp"
#include "brdfnqm/eval.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace brdfnqm;

namespace {

std::vector<ScoredPair> study_layout(int materials, int variants, std::mt19937_64& rng) {
  std::vector<ScoredPair> out;
  std::uniform_real_distribution<double> u(0, 10);
  for (int m = 0; m < materials; ++m) {
    for (int v = 0; v < variants; ++v) {
      const double gt = u(rng);
      out.push_back({"m" + std::to_string(m) + "_" + std::to_string(v), "m" + std::to_string(m), gt + u(rng), gt});
    }
  }
  return out;
}

}  // namespace

TEST(Ranks, AverageTies) {
  const std::vector<double> x{3.0, 1.0, 3.0, 2.0, 3.0};
  EXPECT_EQ(average_ranks(x), (std::vector<double>{4, 1, 4, 2, 4}));
}

TEST(Spearman, MatchesBruteForceOracle) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> small(0, 4);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x(10), y(10);
    for (int i = 0; i < 10; ++i) {
      // Half the trials draw from a tiny integer range to force ties.
      x[i] = trial % 2 ? small(rng) : g(rng);
      y[i] = trial % 3 ? small(rng) : g(rng);
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) continue;
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) continue;
    ASSERT_NEAR(spearman(x, y), oracle::spearman(x, y), 1e-12) << trial;
  }
}

TEST(Spearman, MonotoneAndReversed) {
  const std::vector<double> x{0.1, 0.5, 0.2, 3.0, -1.0};
  std::vector<double> y, r;
  for (double v : x) {
    y.push_back(std::exp(v));
    r.push_back(-v * v * v);
  }
  EXPECT_NEAR(spearman(x, y), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, r), -1.0, 1e-15);
  EXPECT_NEAR(spearman(y, x), spearman(x, y), 1e-15);
}

TEST(Spearman, UndefinedCases) {
  const std::vector<double> c{1, 1, 1}, x{1, 2, 3};
  EXPECT_THROW(spearman(c, x), CorrelationError);
  EXPECT_THROW(spearman(x, c), CorrelationError);
  const std::vector<double> one{1};
  EXPECT_ANY_THROW(spearman(one, one));
  const std::vector<double> two{1, 2};
  EXPECT_ANY_THROW(spearman(x, two));
}

TEST(PerMaterial, OneReversedOutOfTwo) {
  std::vector<ScoredPair> s;
  for (int i = 0; i < 5; ++i) {
    s.push_back({"a" + std::to_string(i), "a", double(i), double(i)});
    s.push_back({"b" + std::to_string(i), "b", double(-i), double(i)});
  }
  const auto r = correlate_per_material(s, Orientation::Positive);
  EXPECT_EQ(r.n_materials, 2u);
  EXPECT_NEAR(r.per_material.at("a"), 1.0, 1e-15);
  EXPECT_NEAR(r.per_material.at("b"), -1.0, 1e-15);
  EXPECT_NEAR(r.average, 0.0, 1e-15);

  const auto neg = correlate_per_material(s, Orientation::Negative);
  EXPECT_NEAR(neg.per_material.at("a"), -1.0, 1e-15);
}

TEST(PerMaterial, StudyLayoutAndPermutationInvariance) {
  std::mt19937_64 rng(32);
  auto s = study_layout(20, 9, rng);
  const auto r = correlate_per_material(s, Orientation::Positive);
  EXPECT_EQ(r.per_material.size(), 20u);
  EXPECT_EQ(r.n_materials, 20u);
  double mean = 0;
  for (const auto& [m, v] : r.per_material) mean += v;
  EXPECT_NEAR(r.average, mean / 20, 1e-15);
  std::shuffle(s.begin(), s.end(), rng);
  EXPECT_NEAR(correlate_per_material(s, Orientation::Positive).average, r.average, 1e-14);
}

TEST(PerMaterial, ConstantPredictionsExcluded) {
  std::vector<ScoredPair> s;
  for (int i = 0; i < 4; ++i) {
    s.push_back({"a" + std::to_string(i), "a", double(i), double(i)});
    s.push_back({"b" + std::to_string(i), "b", 1.0, double(i)});
  }
  const auto r = correlate_per_material(s, Orientation::Positive);
  EXPECT_EQ(r.excluded, (std::vector<std::string>{"b"}));
  EXPECT_EQ(r.n_materials, 1u);
  EXPECT_NEAR(r.average, 1.0, 1e-15);
}

TEST(Report, OrderingEmptyAndByteStable) {
  testsupport::TempDir dir;
  emit_report({}, ReportFormat::Table, dir / "empty.tsv");
  const std::string empty = testsupport::read_bytes(dir / "empty.tsv");
  EXPECT_FALSE(empty.empty());
  EXPECT_EQ(empty.find("RMSE"), std::string::npos);

  std::mt19937_64 rng(33);
  const auto s = study_layout(3, 9, rng);
  std::vector<NamedReport> reports{{"low", correlate_per_material(s, Orientation::Negative)},
                                   {"high", correlate_per_material(s, Orientation::Positive)}};
  for (auto fmt : {ReportFormat::Table, ReportFormat::PlotData}) {
    const std::string text = format_report(reports, fmt);
    EXPECT_LT(text.find("high"), text.find("low"));
  }
  emit_report(reports, ReportFormat::Table, dir / "a.tsv");
  emit_report(reports, ReportFormat::Table, dir / "b.tsv");
  EXPECT_EQ(testsupport::read_bytes(dir / "a.tsv"), testsupport::read_bytes(dir / "b.tsv"));
  EXPECT_THROW(emit_report(reports, ReportFormat::Table, dir / "no" / "such" / "x.tsv"), IoError);
}
