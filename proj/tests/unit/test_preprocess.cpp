#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "brdfnqm/errors.hpp"
#include "brdfnqm/preprocess.hpp"
#include "brdfnqm/synth.hpp"
#include "test_support.hpp"

using namespace brdfnqm;
using testsupport::constant_samples;
using testsupport::random_directions;
using testsupport::random_samples;

namespace {

LabeledPair make_pair(const std::string& id, const DirectionSetPtr& dirs, std::mt19937_64& rng, double jod = 5.0) {
  LabeledPair p;
  p.id = id;
  p.material = "m";
  p.ref = random_samples(dirs, rng);
  p.dist = random_samples(dirs, rng);
  p.jod = jod;
  p.provenance = Provenance::PseudoDeitp;
  return p;
}

std::vector<PairKey> keyed_pool(std::size_t materials, std::size_t per_material) {
  std::vector<PairKey> pool;
  for (std::size_t m = 0; m < materials; ++m) {
    for (std::size_t v = 0; v < per_material; ++v) {
      pool.push_back({"mat" + std::to_string(m) + "_" + std::to_string(v), "mat" + std::to_string(m)});
    }
  }
  return pool;
}

}  // namespace

TEST(PerceptualTransform, Examples) {
  EXPECT_EQ(perceptual_transform(0.0), 0.0);
  EXPECT_NEAR(perceptual_transform(1.0), 0.693147180559945, 1e-12);
  EXPECT_NEAR(perceptual_transform(1000.0), 2.397895272798371, 1e-12);
  EXPECT_THROW(perceptual_transform(-1e-3), DomainError);
  EXPECT_THROW(perceptual_transform(std::nan("")), DomainError);
}

TEST(PerceptualTransform, StrictlyMonotone) {
  double prev = -1.0;
  for (double r = 0.0; r < 100.0; r = r * 1.3 + 1e-6) {
    const double t = perceptual_transform(r);
    ASSERT_GT(t, prev);
    prev = t;
  }
}

TEST(PerceptualTransform, ClampsNegativesInSamples) {
  auto dirs = std::make_shared<DirectionSet>();
  dirs->dirs.resize(1);
  SampledBrdf s{{-0.5, 0.0, 1.0}, dirs};
  const auto t = transform_samples(s);
  EXPECT_EQ(t.values[0], 0.0);
  EXPECT_EQ(t.values[1], 0.0);
  EXPECT_NEAR(t.values[2], std::log(2.0), 1e-15);
}

TEST(Whitening, ConstantInputHitsTheFloor) {
  std::mt19937_64 rng(1);
  const auto dirs = random_directions(50, rng);
  const std::vector<SampledBrdf> refs{constant_samples(dirs, 0.3)};
  const auto st = compute_whitening(refs, false);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(st.mean[c], perceptual_transform(0.3), 1e-15);
    EXPECT_EQ(st.std[c], kStdFloor);
  }
}

TEST(Whitening, TwoPointClosedForm) {
  // Equal numbers of raw 0 and raw 1: transformed values 0 and log 2, so the
  // population mean is log(2)/2 and the population std is log(2)/2.
  std::mt19937_64 rng(2);
  const auto dirs = random_directions(10, rng);
  const std::vector<SampledBrdf> refs{constant_samples(dirs, 0.0), constant_samples(dirs, 1.0)};
  const auto st = compute_whitening(refs, false);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(st.mean[c], std::log(2.0) / 2, 1e-15);
    EXPECT_NEAR(st.std[c], std::log(2.0) / 2, 1e-15);
  }
  // Already transformed input skips the transform.
  const std::vector<SampledBrdf> pre{constant_samples(dirs, 0.0), constant_samples(dirs, std::log(2.0))};
  EXPECT_EQ(compute_whitening(pre, true), st);
}

TEST(Whitening, OrderInvariantAndEmptyRejected) {
  std::mt19937_64 rng(3);
  const auto dirs = random_directions(40, rng);
  std::vector<SampledBrdf> refs;
  for (int i = 0; i < 5; ++i) refs.push_back(random_samples(dirs, rng));
  const auto a = compute_whitening(refs, false);
  std::reverse(refs.begin(), refs.end());
  const auto b = compute_whitening(refs, false);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(a.mean[c], b.mean[c], 1e-14);
    EXPECT_NEAR(a.std[c], b.std[c], 1e-14);
  }
  EXPECT_THROW(compute_whitening(std::vector<SampledBrdf>{}, false), ParameterError);
}

TEST(Whiten, IdentityAndMean) {
  std::mt19937_64 rng(4);
  const auto dirs = random_directions(20, rng);
  const auto s = random_samples(dirs, rng);
  EXPECT_EQ(whiten(s, WhiteningStats{}).values, s.values);
  WhiteningStats st;
  st.mean = {0.3, 0.3, 0.3};
  st.std = {2.0, 3.0, 4.0};
  for (double v : whiten(constant_samples(dirs, 0.3), st).values) EXPECT_EQ(v, 0.0);
}

TEST(Whiten, PoolHasZeroMeanUnitStd) {
  std::mt19937_64 rng(5);
  const auto dirs = random_directions(100, rng);
  std::vector<SampledBrdf> refs;
  for (int i = 0; i < 8; ++i) refs.push_back(random_samples(dirs, rng));
  const auto st = compute_whitening(refs, false);
  std::array<double, 3> sum{}, sq{};
  double n = 0;
  for (const auto& r : refs) {
    const auto w = whiten(transform_samples(r), st);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      for (int c = 0; c < 3; ++c) {
        sum[c] += w.at(i, c);
        sq[c] += w.at(i, c) * w.at(i, c);
      }
    }
    n += static_cast<double>(w.rows());
  }
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(sum[c] / n, 0.0, 1e-6);
    EXPECT_NEAR(std::sqrt(sq[c] / n - (sum[c] / n) * (sum[c] / n)), 1.0, 1e-6);
  }
}

TEST(Whiten, AffineAndArgmaxPreserving) {
  std::mt19937_64 rng(6);
  const auto dirs = random_directions(30, rng);
  const auto s = random_samples(dirs, rng);
  WhiteningStats st;
  st.mean = {0.1, -0.2, 0.5};
  st.std = {0.5, 2.0, 1.5};
  const auto w = whiten(s, st);
  for (int c = 0; c < 3; ++c) {
    std::size_t arg_in = 0, arg_out = 0;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      EXPECT_NEAR(w.at(i, c) * st.std[c] + st.mean[c], s.at(i, c), 1e-12);
      if (s.at(i, c) > s.at(arg_in, c)) arg_in = i;
      if (w.at(i, c) > w.at(arg_out, c)) arg_out = i;
    }
    EXPECT_EQ(arg_in, arg_out);
  }
}

TEST(AugmentNoise, ZeroSigmaOnlyChangesProvenance) {
  std::mt19937_64 rng(7);
  const auto dirs = random_directions(50, rng);
  auto p = make_pair("p", dirs, rng);
  p.severity = 0.3;
  const auto q = augment_noise(p, 0.0, 1);
  EXPECT_EQ(q.ref.values, p.ref.values);
  EXPECT_EQ(q.dist.values, p.dist.values);
  EXPECT_EQ(q.jod, p.jod);
  EXPECT_EQ(q.severity, p.severity);
  EXPECT_EQ(q.provenance, Provenance::AugmentedNoise);
}

TEST(AugmentNoise, StatisticsAndDeterminism) {
  std::mt19937_64 rng(8);
  const auto dirs = random_directions(500, rng);
  LabeledPair p = make_pair("p", dirs, rng);
  p.dist = constant_samples(dirs, 1.0);  // far from zero, so no clamping
  const auto a = augment_noise(p, 0.01, 42);
  const auto b = augment_noise(p, 0.01, 42);
  const auto c = augment_noise(p, 0.01, 43);
  EXPECT_EQ(a.dist.values, b.dist.values);
  EXPECT_NE(a.dist.values, c.dist.values);
  EXPECT_EQ(a.ref.values, p.ref.values);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < a.dist.values.size(); ++i) {
    const double d = a.dist.values[i] - p.dist.values[i];
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(a.dist.values.size());
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  EXPECT_NEAR(sd, 0.01, 0.15 * 0.01);
  EXPECT_THROW(augment_noise(p, -0.1, 0), ParameterError);
}

TEST(AugmentNoise, ClampsAndLabels) {
  std::mt19937_64 rng(9);
  const auto dirs = random_directions(200, rng);
  LabeledPair p = make_pair("p", dirs, rng);
  p.dist = constant_samples(dirs, 0.0);
  p.severity = 0.1;
  const auto q = augment_noise(p, 0.05, 3, severity_oracle_label);
  for (double v : q.dist.values) ASSERT_GE(v, 0.0);
  EXPECT_GT(q.severity, p.severity);
  EXPECT_DOUBLE_EQ(q.jod, synthetic_oracle_jod(q.severity));
}

TEST(AugmentScale, IdentityLinearityAndLabel) {
  std::mt19937_64 rng(10);
  const auto dirs = random_directions(60, rng);
  const auto p = make_pair("pair-7", dirs, rng, 6.5);
  const auto same = augment_scale(p, 1.0, 1.0, 5);
  EXPECT_EQ(same.ref.values, p.ref.values);
  EXPECT_EQ(same.dist.values, p.dist.values);

  const auto q = augment_scale(p, 0.95, 1.05, 5);
  const double f = draw_scale_factor("pair-7", 0.95, 1.05, 5);
  EXPECT_GE(f, 0.95);
  EXPECT_LE(f, 1.05);
  for (std::size_t i = 0; i < p.ref.values.size(); ++i) {
    ASSERT_EQ(q.ref.values[i], f * p.ref.values[i]);
    ASSERT_EQ(q.dist.values[i], f * p.dist.values[i]);
  }
  EXPECT_EQ(q.jod, 6.5);
  EXPECT_EQ(q.provenance, Provenance::AugmentedScale);
  EXPECT_NE(draw_scale_factor("pair-7", 0.95, 1.05, 6), f);
  EXPECT_THROW(augment_scale(p, 1.1, 1.0, 0), ParameterError);
}

TEST(AugmentScale, FactorsAreUniform) {
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += draw_scale_factor("p" + std::to_string(i), 0.95, 1.05, 1);
  EXPECT_NEAR(sum / n, 1.0, 0.002);
}

TEST(AugmentScale, OncePerTrainingPairDoublesTheSet) {
  auto dirs = std::make_shared<DirectionSet>();
  dirs->dirs.resize(1);
  dirs->cos_wi = {1.0};
  dirs->cos_wo = {1.0};
  std::vector<LabeledPair> train;
  for (int i = 0; i < 2672; ++i) {
    LabeledPair p;
    p.id = "p" + std::to_string(i);
    p.ref = constant_samples(dirs, 0.5);
    p.dist = constant_samples(dirs, 0.4);
    p.jod = 5.0;
    train.push_back(std::move(p));
  }
  std::vector<LabeledPair> out = train;
  for (const auto& p : train) out.push_back(augment_scale(p, 0.95, 1.05, 1));
  EXPECT_EQ(out.size(), 5344u);
}

TEST(Histogram, DeficitArithmetic) {
  HistogramSpec spec;
  spec.bins = 4;
  spec.lo = 0;
  spec.hi = 4;
  EXPECT_EQ(histogram_deficit({3, 1, 0, 2}, spec), (std::vector<std::size_t>{0, 2, 3, 1}));
  spec.target_weights = {1, 2, 0, 1};
  EXPECT_EQ(histogram_deficit({3, 1, 5, 2}, spec), (std::vector<std::size_t>{0, 5, 0, 1}));
  EXPECT_EQ(jod_bin(10.0, HistogramSpec{}), 9);
  EXPECT_EQ(jod_bin(0.0, HistogramSpec{}), 0);
  EXPECT_EQ(jod_bin(9.999, HistogramSpec{}), 9);
}

TEST(Balance, UniformPoolNeedsNothing) {
  std::mt19937_64 rng(11);
  const auto dirs = random_directions(20, rng);
  std::vector<LabeledPair> pool;
  for (int b = 0; b < 10; ++b) pool.push_back(make_pair("p" + std::to_string(b), dirs, rng, b + 0.5));
  const auto out = balance_by_jod(pool, HistogramSpec{}, 1, [](const LabeledPair&) { return 5.0; });
  EXPECT_TRUE(out.empty());
}

TEST(Balance, FillsOnlyUnderRepresentedBins) {
  std::mt19937_64 rng(12);
  const auto dirs = random_directions(50, rng);
  std::vector<LabeledPair> pool;
  for (int i = 0; i < 5; ++i) {
    LabeledPair p = make_pair("p" + std::to_string(i), dirs, rng);
    p.severity = 0.02 * i;
    p.jod = synthetic_oracle_jod(p.severity);
    pool.push_back(std::move(p));
  }
  for (const auto& p : pool) ASSERT_GE(p.jod, 9.0);
  HistogramSpec spec;
  spec.sigma = 0.01;
  spec.sigma_max_scale = 2000.0;
  const auto out = balance_by_jod(pool, spec, 3, severity_oracle_label);
  ASSERT_FALSE(out.empty());
  std::vector<std::size_t> per_bin(10, 0);
  std::set<std::string> ids;
  for (const auto& c : out) {
    ASSERT_LT(c.jod, 9.0);
    ++per_bin[static_cast<std::size_t>(jod_bin(c.jod, spec))];
    EXPECT_EQ(c.provenance, Provenance::AugmentedNoise);
    EXPECT_TRUE(ids.insert(c.id).second);
  }
  for (std::size_t b = 0; b < 9; ++b) EXPECT_LE(per_bin[b], 5u);

  const auto again = balance_by_jod(pool, spec, 3, severity_oracle_label);
  ASSERT_EQ(again.size(), out.size());
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(again[i].dist.values, out[i].dist.values);
}

TEST(Isotonic, PoolAdjacentViolators) {
  // (x, y): 1->9, 2->7, 3->8, 4->3. The violation at x=2,3 pools to 7.5.
  const std::vector<double> x{1, 2, 3, 4}, y{9, 7, 8, 3};
  const IsotonicLabeler iso(x, y);
  EXPECT_EQ(iso.knots_y(), (std::vector<double>{9, 7.5, 3}));
  EXPECT_EQ(iso.knots_x(), (std::vector<double>{1, 2.5, 4}));
  EXPECT_DOUBLE_EQ(iso.predict(0.0), 9.0);
  EXPECT_DOUBLE_EQ(iso.predict(1.75), 8.25);
  EXPECT_DOUBLE_EQ(iso.predict(10.0), 3.0);
  for (double e = 0.0; e < 5.0; e += 0.01) ASSERT_GE(iso.predict(e), iso.predict(e + 0.01));
}

TEST(Isotonic, FitOnPoolIsMonotone) {
  std::mt19937_64 rng(13);
  const auto dirs = random_directions(40, rng);
  std::vector<LabeledPair> pool;
  std::uniform_real_distribution<double> u(0, 10);
  for (int i = 0; i < 30; ++i) pool.push_back(make_pair("p" + std::to_string(i), dirs, rng, u(rng)));
  const auto iso = IsotonicLabeler::fit_on_pool(pool);
  const auto& ys = iso.knots_y();
  for (std::size_t i = 1; i < ys.size(); ++i) ASSERT_LE(ys[i], ys[i - 1]);
  EXPECT_THROW(IsotonicLabeler().predict(1.0), ParameterError);
}

TEST(Splits, SmallExamples) {
  const auto pool = keyed_pool(1, 10);
  const auto s = make_splits(pool, {}, 1);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.val.size(), 2u);
  EXPECT_TRUE(s.test.empty());

  const auto all = make_splits(pool, {"mat0"}, 1);
  EXPECT_EQ(all.test.size(), 10u);
  EXPECT_TRUE(all.train.empty());
  EXPECT_TRUE(all.val.empty());
}

TEST(Splits, StudySizedPool) {
  // 3,340 splittable pairs plus 20 held-out materials with 9 variants each.
  auto pool = keyed_pool(20, 9);
  std::vector<std::string> study;
  for (int m = 0; m < 20; ++m) study.push_back("mat" + std::to_string(m));
  for (int i = 0; i < 3340; ++i) pool.push_back({"x" + std::to_string(i), "other" + std::to_string(i / 9)});
  ASSERT_EQ(pool.size(), 3520u);
  const auto s = make_splits(pool, study, 7);
  EXPECT_EQ(s.train.size(), 2672u);
  EXPECT_EQ(s.val.size(), 668u);
  EXPECT_EQ(s.test.size(), 180u);

  std::set<std::string> all;
  for (const auto* l : {&s.train, &s.val, &s.test}) all.insert(l->begin(), l->end());
  EXPECT_EQ(all.size(), pool.size());
}

TEST(Splits, DeterministicAndSeedDependent) {
  const auto pool = keyed_pool(10, 9);
  const auto a = make_splits(pool, {"mat3"}, 5), b = make_splits(pool, {"mat3"}, 5), c = make_splits(pool, {"mat3"}, 6);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_NE(a.train, c.train);
  EXPECT_THROW(make_splits(std::vector<PairKey>{}, {}, 0), ParameterError);
}

TEST(Splits, FileRoundTrip) {
  testsupport::TempDir dir;
  const auto s = make_splits(keyed_pool(4, 9), {"mat1"}, 2);
  save_split(s, dir / "split.tsv");
  const auto back = load_split(dir / "split.tsv");
  EXPECT_EQ(back.train, s.train);
  EXPECT_EQ(back.val, s.val);
  EXPECT_EQ(back.test, s.test);
  EXPECT_EQ(back.seed, s.seed);
  EXPECT_EQ(back.train_fraction, s.train_fraction);
}

TEST(Provenance, NamesRoundTrip) {
  for (auto p : {Provenance::SubjectiveJod, Provenance::PseudoDeitp, Provenance::AugmentedNoise,
                 Provenance::AugmentedScale, Provenance::SyntheticOracle, Provenance::Unlabelled}) {
    EXPECT_EQ(parse_provenance(to_string(p)), p);
  }
  EXPECT_THROW(parse_provenance("Rendered"), FormatError);
}
