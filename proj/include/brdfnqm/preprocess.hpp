#pragma once

// Perceptual transforms, whitening, augmentation and splitting of labelled
// sample pairs.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brdfnqm/sampling.hpp"

namespace brdfnqm {

// log(rho^(1/3) + 1). Throws DomainError for negative or non-finite input.
double perceptual_transform(double rho);

// Clamp at 0, then perceptual_transform, element-wise.
SampledBrdf transform_samples(const SampledBrdf& s);

inline constexpr double kStdFloor = 1e-8;

struct WhiteningStats {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> std{1.0, 1.0, 1.0};

  bool operator==(const WhiteningStats&) const = default;
};

// Per-channel population mean/std over every sample of every reference.
// When `transformed` is false the inputs are clamped and transformed first.
WhiteningStats compute_whitening(std::span<const SampledBrdf> train_refs, bool transformed);

SampledBrdf whiten(const SampledBrdf& s, const WhiteningStats& stats);

enum class Provenance { SubjectiveJod, PseudoDeitp, AugmentedNoise, AugmentedScale, SyntheticOracle, Unlabelled };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view text);

struct LabeledPair {
  std::string id;
  std::string material;
  SampledBrdf ref;
  SampledBrdf dist;
  double jod = std::numeric_limits<double>::quiet_NaN();
  Provenance provenance = Provenance::Unlabelled;
  // Synthetic severity when known (NaN otherwise).
  double severity = std::numeric_limits<double>::quiet_NaN();
};

using Labeler = std::function<double(const LabeledPair&)>;

// Adds N(0, sigma^2) independently to every sample and channel of the
// distorted member (raw reflectance), clamps at 0. The reference is
// untouched. The child's severity grows by the noise severity, and when a
// labeler is supplied the child's JOD comes from it (else it is inherited).
LabeledPair augment_noise(const LabeledPair& pair, double sigma, std::uint64_t seed, const Labeler& labeler = {});

// Multiplies both members by one factor drawn from U[lo, hi]. Label kept.
LabeledPair augment_scale(const LabeledPair& pair, double lo, double hi, std::uint64_t seed);
double draw_scale_factor(std::string_view pair_id, double lo, double hi, std::uint64_t seed);

struct HistogramSpec {
  int bins = 10;
  double lo = 0.0;
  double hi = 10.0;
  // Relative target mass per bin; empty means uniform.
  std::vector<double> target_weights;
  double sigma = 0.01;
  // Noise level of each attempt is sigma * s, s log-uniform in [1, sigma_max_scale].
  double sigma_max_scale = 1.0;
  std::size_t max_new = 100000;
  // 0 means 50 attempts per missing pair.
  std::size_t max_attempts = 0;
};

int jod_bin(double jod, const HistogramSpec& spec);
std::vector<std::size_t> jod_histogram(std::span<const LabeledPair> pool, const HistogramSpec& spec);
// Pairs missing per bin to reach the target shape without removing any.
std::vector<std::size_t> histogram_deficit(const std::vector<std::size_t>& counts, const HistogramSpec& spec);

// Generates noise-augmented pairs from randomly chosen sources, keeping only
// those whose label falls in a bin that is still short of its target, until
// every deficit is filled or a cap is reached.
std::vector<LabeledPair> balance_by_jod(std::span<const LabeledPair> pool, const HistogramSpec& spec,
                                        std::uint64_t seed, const Labeler& labeler);

// Monotone non-increasing map from a BRDF-space error to JOD, fitted by
// pool-adjacent-violators and evaluated by linear interpolation.
class IsotonicLabeler {
 public:
  IsotonicLabeler() = default;
  IsotonicLabeler(std::span<const double> errors, std::span<const double> jods);

  // Fits on MA-LogE of every labelled pair in the pool.
  static IsotonicLabeler fit_on_pool(std::span<const LabeledPair> pool);

  double predict(double error) const;
  double operator()(const LabeledPair& pair) const;

  const std::vector<double>& knots_x() const { return xs_; }
  const std::vector<double>& knots_y() const { return ys_; }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

// Synthetic-data labeler: synthetic_oracle_jod(pair.severity).
double severity_oracle_label(const LabeledPair& pair);

struct PairKey {
  std::string id;
  std::string material;
};

struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

// Pairs of test materials go to test; the rest is shuffled by pair and cut
// round(train_fraction * n) / remainder. Each list keeps pool order.
SplitManifest make_splits(std::span<const PairKey> pool, const std::vector<std::string>& test_materials,
                          std::uint64_t seed, double train_fraction = 0.8);
SplitManifest make_splits(std::span<const LabeledPair> pool, const std::vector<std::string>& test_materials,
                          std::uint64_t seed, double train_fraction = 0.8);

void save_split(const SplitManifest& split, const std::filesystem::path& path);
SplitManifest load_split(const std::filesystem::path& path);

}  // namespace brdfnqm
