#pragma once

// Reduction of a tabulated BRDF to K reflectance samples at shared half/diff
// directions, chosen from a warped candidate grid with a grazing cutoff.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "brdfnqm/brdf.hpp"

namespace brdfnqm {

inline constexpr double kGrazingCutoff = 75.0 * kPi / 180.0;
inline constexpr std::size_t kDefaultSampleCount = 500;

struct DirectionSet {
  std::vector<HalfDiffCoords> dirs;
  std::vector<double> cos_wi;
  std::vector<double> cos_wo;
  std::uint64_t seed = 0;
  std::string source_material;

  std::size_t size() const { return dirs.size(); }
  bool operator==(const DirectionSet&) const = default;
};

using DirectionSetPtr = std::shared_ptr<const DirectionSet>;

// K x 3 reflectance matrix, row-major (sample, channel).
struct SampledBrdf {
  std::vector<double> values;
  DirectionSetPtr directions;

  std::size_t rows() const { return values.size() / 3; }
  double at(std::size_t row, int channel) const { return values[3 * row + channel]; }
  double& at(std::size_t row, int channel) { return values[3 * row + channel]; }
};

// True when both samples were read at the same directions (same object or
// identical content).
bool same_directions(const SampledBrdf& a, const SampledBrdf& b);
// Throws PairingError unless same_directions(a, b).
void require_paired(const SampledBrdf& a, const SampledBrdf& b);

struct CandidateGridConfig {
  int n_theta_h = 32;
  int n_theta_d = 16;
  int n_phi_d = 16;
};

// theta_h(i) = 90 deg * (i / (n_th - 1))^2, theta_d uniform over [0, 75] deg,
// phi_d uniform over [0, 180) deg. Ordered theta_h-major, phi_d-minor.
std::vector<HalfDiffCoords> build_candidate_grid(int n_theta_h, int n_theta_d, int n_phi_d);
inline std::vector<HalfDiffCoords> build_candidate_grid(const CandidateGridConfig& cfg) {
  return build_candidate_grid(cfg.n_theta_h, cfg.n_theta_d, cfg.n_phi_d);
}

// Keeps candidates whose reconstructed incoming and outgoing directions
// (phi_h = 0) are both above the horizon with theta <= 75 deg.
std::vector<HalfDiffCoords> filter_grazing(const std::vector<HalfDiffCoords>& candidates);
bool passes_grazing(const HalfDiffCoords& hd);

// Canonical ordering: theta_h, then theta_d, then phi_d.
bool canonical_less(const HalfDiffCoords& a, const HalfDiffCoords& b);

enum class MagnitudeMode { Luminance, MaxChannel };

struct SelectionConfig {
  std::size_t k = kDefaultSampleCount;
  int strata = 10;
  MagnitudeMode magnitude = MagnitudeMode::Luminance;
};

// Magnitude-prioritized stratified selection:
//  1. drop grazing candidates and physically duplicate ones (theta_d = 0 with
//     phi_d != 0 describe the same direction pair as phi_d = 0);
//  2. rank by magnitude, descending, ties in canonical order;
//  3. cut into `strata` equal-count strata, moving each cut forward so a run
//     of equal magnitudes is never split;
//  4. give every stratum one sample, distribute the rest proportionally to
//     stratum mean magnitude (capped by stratum size, largest remainder);
//  5. take the top of each stratum; sort the result canonically.
// The procedure is deterministic; `seed` is recorded in the result.
DirectionSet select_samples(const TabulatedBrdf& reference, const std::vector<HalfDiffCoords>& candidates,
                            std::uint64_t seed, const SelectionConfig& cfg = {});

SampledBrdf sample_brdf(const TabulatedBrdf& brdf, const DirectionSetPtr& dirs);

// Text form: versioned header (k, seed, material) then one row per sample:
// theta_h theta_d phi_d cos_i cos_o R G B. Values are printed with 17
// significant digits so reading back is exact.
void save_samples(const SampledBrdf& s, const std::filesystem::path& path);
SampledBrdf load_samples(const std::filesystem::path& path);

}  // namespace brdfnqm
