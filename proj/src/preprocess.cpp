#include "brdfnqm/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "brdfnqm/baselines.hpp"
#include "brdfnqm/errors.hpp"
#include "brdfnqm/rng.hpp"
#include "brdfnqm/synth.hpp"
#include "brdfnqm/table.hpp"

namespace brdfnqm {

namespace {

constexpr std::array<std::string_view, 6> kProvenanceNames{"SubjectiveJod",  "PseudoDeitp",     "AugmentedNoise",
                                                           "AugmentedScale", "SyntheticOracle", "Unlabelled"};

}  // namespace

double perceptual_transform(double rho) {
  if (!std::isfinite(rho) || rho < 0.0) throw DomainError("perceptual_transform needs finite rho >= 0");
  return std::log(std::cbrt(rho) + 1.0);
}

SampledBrdf transform_samples(const SampledBrdf& s) {
  SampledBrdf out = s;
  for (double& v : out.values) v = perceptual_transform(std::max(v, 0.0));
  return out;
}

WhiteningStats compute_whitening(std::span<const SampledBrdf> train_refs, bool transformed) {
  if (train_refs.empty()) throw ParameterError("whitening statistics need at least one reference");
  std::array<double, 3> sum{}, count{};
  auto value = [transformed](double v) { return transformed ? v : perceptual_transform(std::max(v, 0.0)); };
  for (const auto& s : train_refs) {
    for (std::size_t i = 0; i < s.rows(); ++i) {
      for (int c = 0; c < 3; ++c) {
        sum[c] += value(s.at(i, c));
        count[c] += 1.0;
      }
    }
  }
  if (count[0] == 0.0) throw ParameterError("whitening statistics need at least one sample");
  WhiteningStats st;
  for (int c = 0; c < 3; ++c) st.mean[c] = sum[c] / count[c];
  // Second pass for numerically stable central moments.
  std::array<double, 3> sq{};
  for (const auto& s : train_refs) {
    for (std::size_t i = 0; i < s.rows(); ++i) {
      for (int c = 0; c < 3; ++c) {
        const double d = value(s.at(i, c)) - st.mean[c];
        sq[c] += d * d;
      }
    }
  }
  for (int c = 0; c < 3; ++c) st.std[c] = std::max(std::sqrt(sq[c] / count[c]), kStdFloor);
  return st;
}

SampledBrdf whiten(const SampledBrdf& s, const WhiteningStats& stats) {
  SampledBrdf out = s;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (int c = 0; c < 3; ++c) out.at(i, c) = (out.at(i, c) - stats.mean[c]) / stats.std[c];
  }
  return out;
}

std::string_view to_string(Provenance p) { return kProvenanceNames[static_cast<std::size_t>(p)]; }

Provenance parse_provenance(std::string_view text) {
  for (std::size_t i = 0; i < kProvenanceNames.size(); ++i) {
    if (kProvenanceNames[i] == text) return static_cast<Provenance>(i);
  }
  throw FormatError("unknown provenance '" + std::string(text) + "'");
}

LabeledPair augment_noise(const LabeledPair& pair, double sigma, std::uint64_t seed, const Labeler& labeler) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ParameterError("noise sigma must be finite and >= 0");
  LabeledPair out = pair;
  out.provenance = Provenance::AugmentedNoise;
  const std::uint64_t stream = stream_seed(seed, pair.id);
  if (sigma > 0.0) {
    for (std::size_t j = 0; j < out.dist.values.size(); ++j) {
      out.dist.values[j] = std::max(out.dist.values[j] + sigma * counter_normal(stream, j), 0.0);
    }
  }
  if (!std::isnan(pair.severity)) {
    out.severity = pair.severity + severity({DistortionKind::GaussianNoise, sigma, 0});
  }
  if (labeler) out.jod = labeler(out);
  return out;
}

double draw_scale_factor(std::string_view pair_id, double lo, double hi, std::uint64_t seed) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw ParameterError("scale range needs lo <= hi");
  if (lo == hi) return lo;
  return lo + (hi - lo) * counter_uniform(stream_seed(seed, pair_id), 0);
}

LabeledPair augment_scale(const LabeledPair& pair, double lo, double hi, std::uint64_t seed) {
  const double f = draw_scale_factor(pair.id, lo, hi, seed);
  LabeledPair out = pair;
  out.provenance = Provenance::AugmentedScale;
  if (f != 1.0) {
    for (double& v : out.ref.values) v *= f;
    for (double& v : out.dist.values) v *= f;
  }
  return out;
}

int jod_bin(double jod, const HistogramSpec& spec) {
  const double u = (jod - spec.lo) / (spec.hi - spec.lo);
  return std::clamp(static_cast<int>(std::floor(u * spec.bins)), 0, spec.bins - 1);
}

std::vector<std::size_t> jod_histogram(std::span<const LabeledPair> pool, const HistogramSpec& spec) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(spec.bins), 0);
  for (const auto& p : pool) {
    if (!std::isnan(p.jod)) ++counts[static_cast<std::size_t>(jod_bin(p.jod, spec))];
  }
  return counts;
}

std::vector<std::size_t> histogram_deficit(const std::vector<std::size_t>& counts, const HistogramSpec& spec) {
  const std::size_t n = counts.size();
  std::vector<double> w = spec.target_weights;
  if (w.empty()) w.assign(n, 1.0);
  if (w.size() != n) throw ParameterError("target histogram must have one weight per bin");
  // Smallest scale T with T * w_b >= count_b for every bin.
  double scale = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    if (w[b] < 0.0) throw ParameterError("target weights must be >= 0");
    if (w[b] > 0.0) scale = std::max(scale, static_cast<double>(counts[b]) / w[b]);
  }
  std::vector<std::size_t> deficit(n, 0);
  for (std::size_t b = 0; b < n; ++b) {
    const auto target = static_cast<std::size_t>(std::llround(scale * w[b]));
    deficit[b] = target > counts[b] ? target - counts[b] : 0;
  }
  return deficit;
}

std::vector<LabeledPair> balance_by_jod(std::span<const LabeledPair> pool, const HistogramSpec& spec,
                                        std::uint64_t seed, const Labeler& labeler) {
  if (pool.empty()) throw ParameterError("balance_by_jod needs a non-empty pool");
  if (!labeler) throw ParameterError("balance_by_jod needs a labeler");
  if (spec.bins < 1 || !(spec.hi > spec.lo)) throw ParameterError("invalid histogram spec");
  if (!(spec.sigma_max_scale >= 1.0)) throw ParameterError("sigma_max_scale must be >= 1");

  auto deficit = histogram_deficit(jod_histogram(pool, spec), spec);
  std::size_t missing = std::accumulate(deficit.begin(), deficit.end(), std::size_t{0});
  const std::size_t attempts = spec.max_attempts ? spec.max_attempts : 50 * missing;
  const double log_scale = std::log(spec.sigma_max_scale);

  std::vector<LabeledPair> generated;
  for (std::size_t a = 0; a < attempts && missing > 0 && generated.size() < spec.max_new; ++a) {
    const auto src = std::min(pool.size() - 1,
                              static_cast<std::size_t>(counter_uniform(seed, 2 * a) * static_cast<double>(pool.size())));
    const double sigma = spec.sigma * std::exp(log_scale * counter_uniform(seed, 2 * a + 1));
    LabeledPair child = augment_noise(pool[src], sigma, stream_seed(seed, a), labeler);
    if (std::isnan(child.jod)) continue;
    const auto bin = static_cast<std::size_t>(jod_bin(child.jod, spec));
    if (deficit[bin] == 0) continue;
    --deficit[bin];
    --missing;
    child.id = pool[src].id + "~b" + std::to_string(a);
    generated.push_back(std::move(child));
  }
  return generated;
}

IsotonicLabeler::IsotonicLabeler(std::span<const double> errors, std::span<const double> jods) {
  if (errors.size() != jods.size() || errors.empty()) {
    throw ParameterError("isotonic fit needs matching, non-empty inputs");
  }
  std::vector<std::size_t> order(errors.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return errors[a] < errors[b]; });

  // Pool adjacent violators for a non-increasing fit.
  struct Block {
    double xsum, ysum, n;
  };
  std::vector<Block> blocks;
  for (std::size_t i : order) {
    blocks.push_back({errors[i], jods[i], 1.0});
    while (blocks.size() > 1) {
      const Block& last = blocks.back();
      const Block& prev = blocks[blocks.size() - 2];
      if (prev.ysum / prev.n >= last.ysum / last.n) break;
      Block merged{prev.xsum + last.xsum, prev.ysum + last.ysum, prev.n + last.n};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  for (const auto& b : blocks) {
    xs_.push_back(b.xsum / b.n);
    ys_.push_back(b.ysum / b.n);
  }
}

IsotonicLabeler IsotonicLabeler::fit_on_pool(std::span<const LabeledPair> pool) {
  std::vector<double> xs, ys;
  for (const auto& p : pool) {
    if (std::isnan(p.jod)) continue;
    xs.push_back(baseline_metric(MetricKind::MA_LogE, p.ref, p.dist));
    ys.push_back(p.jod);
  }
  return IsotonicLabeler(xs, ys);
}

double IsotonicLabeler::predict(double error) const {
  if (xs_.empty()) throw ParameterError("isotonic labeler is not fitted");
  if (error <= xs_.front()) return ys_.front();
  if (error >= xs_.back()) return ys_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), error);
  const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
  const std::size_t lo = hi - 1;
  const double t = (error - xs_[lo]) / (xs_[hi] - xs_[lo]);
  return ys_[lo] + t * (ys_[hi] - ys_[lo]);
}

double IsotonicLabeler::operator()(const LabeledPair& pair) const {
  return predict(baseline_metric(MetricKind::MA_LogE, pair.ref, pair.dist));
}

double severity_oracle_label(const LabeledPair& pair) {
  if (std::isnan(pair.severity)) throw ParameterError("pair " + pair.id + " carries no severity");
  return synthetic_oracle_jod(pair.severity);
}

SplitManifest make_splits(std::span<const PairKey> pool, const std::vector<std::string>& test_materials,
                          std::uint64_t seed, double train_fraction) {
  if (pool.empty()) throw ParameterError("cannot split an empty pool");
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) throw ParameterError("train fraction must lie in [0, 1]");
  const std::unordered_set<std::string> test_set(test_materials.begin(), test_materials.end());

  SplitManifest m;
  m.seed = seed;
  m.train_fraction = train_fraction;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (test_set.count(pool[i].material)) {
      m.test.push_back(pool[i].id);
    } else {
      rest.push_back(i);
    }
  }
  // Fisher-Yates with counter draws, so the permutation is platform independent.
  std::vector<std::size_t> perm = rest;
  for (std::size_t i = perm.size(); i > 1; --i) {
    const auto j = std::min(i - 1, static_cast<std::size_t>(counter_uniform(seed, i) * static_cast<double>(i)));
    std::swap(perm[i - 1], perm[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(perm.size())));
  std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  for (std::size_t i : train_idx) m.train.push_back(pool[i].id);
  for (std::size_t i : val_idx) m.val.push_back(pool[i].id);

  std::unordered_set<std::string> seen;
  for (const auto* list : {&m.train, &m.val, &m.test}) {
    for (const auto& id : *list) {
      if (!seen.insert(id).second) throw Error("split invariant violated: pair '" + id + "' assigned twice");
    }
  }
  return m;
}

SplitManifest make_splits(std::span<const LabeledPair> pool, const std::vector<std::string>& test_materials,
                          std::uint64_t seed, double train_fraction) {
  std::vector<PairKey> keys;
  keys.reserve(pool.size());
  for (const auto& p : pool) keys.push_back({p.id, p.material});
  return make_splits(std::span<const PairKey>(keys), test_materials, seed, train_fraction);
}

void save_split(const SplitManifest& split, const std::filesystem::path& path) {
  TextTable t;
  t.kind = "split";
  t.set_meta("seed", std::to_string(split.seed));
  t.set_meta("train_fraction", fmt_double(split.train_fraction));
  t.set_meta("counts", std::to_string(split.train.size()) + " " + std::to_string(split.val.size()) + " " +
                           std::to_string(split.test.size()));
  t.columns = {"pair_id", "set"};
  for (const auto& id : split.train) t.rows.push_back({id, "train"});
  for (const auto& id : split.val) t.rows.push_back({id, "val"});
  for (const auto& id : split.test) t.rows.push_back({id, "test"});
  write_table(t, path);
}

SplitManifest load_split(const std::filesystem::path& path) {
  const TextTable t = read_table(path, "split");
  SplitManifest m;
  m.seed = parse_uint(t.meta_value("seed"));
  m.train_fraction = parse_double(t.meta_value("train_fraction"));
  const std::size_t c_id = t.column("pair_id"), c_set = t.column("set");
  for (const auto& row : t.rows) {
    if (row[c_set] == "train") {
      m.train.push_back(row[c_id]);
    } else if (row[c_set] == "val") {
      m.val.push_back(row[c_id]);
    } else if (row[c_set] == "test") {
      m.test.push_back(row[c_id]);
    } else {
      throw FormatError(path.string() + ": unknown set '" + row[c_set] + "'");
    }
  }
  return m;
}

}  // namespace brdfnqm
