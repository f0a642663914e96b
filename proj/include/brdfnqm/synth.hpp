#pragma once

// Analytic reference materials and controlled distortions, tabulated in the
// MERL layout so the full pipeline can run without measured data.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "brdfnqm/brdf.hpp"

namespace brdfnqm {

enum class AnalyticModel { Lambert, BlinnPhong, GgxMicrofacet };

struct AnalyticBrdfParams {
  AnalyticModel model = AnalyticModel::Lambert;
  Rgb diffuse{0.5, 0.5, 0.5};
  Rgb specular{0.0, 0.0, 0.0};
  double roughness = 0.5;

  void validate() const;
  // Blinn-Phong exponent matched to the roughness: 2 / r^2 - 2.
  double phong_exponent() const { return 2.0 / (roughness * roughness) - 2.0; }
};

// Reflectance of the analytic model for a direction pair given by its
// cosines. Returns zero when either direction is at or below the horizon.
//
// GGX uses the Smith separable shadowing term and a Schlick Fresnel for a
// dielectric (F0 = 0.04) normalized to 1 at normal incidence, so `specular`
// is the lobe colour at normal incidence.
Rgb eval_analytic(const AnalyticBrdfParams& params, double cos_i, double cos_o, double cos_h, double cos_d);
Rgb eval_analytic(const AnalyticBrdfParams& params, const SphericalDirection& wi, const SphericalDirection& wo);

// Fills every bin from the analytic model at the bin centre (phi_h = 0).
// Bins whose reconstructed directions fall below the horizon are invalid.
TabulatedBrdf tabulate(const AnalyticBrdfParams& params, std::string name = "analytic");

enum class DistortionKind { RoughnessShift, SpecularScale, DiffuseTint, GaussianNoise };

std::string_view to_string(DistortionKind kind);
DistortionKind parse_distortion_kind(std::string_view text);

struct DistortionSpec {
  DistortionKind kind = DistortionKind::GaussianNoise;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
};

// "Kind:magnitude[:seed]", e.g. "RoughnessShift:0.3".
DistortionSpec parse_distortion_spec(std::string_view text);
std::string format_distortion_spec(const DistortionSpec& spec);

// Magnitude normalized by the nominal range of its kind. Strictly increasing
// in magnitude for a fixed kind.
double severity(const DistortionSpec& spec);

// Label used for synthetic data: 10 * (1 - severity), clamped to [0, 10].
double synthetic_oracle_jod(double severity);

// Table-level distortions. The diffuse floor is the per-channel minimum over
// valid bins; "specular" is everything above it.
//   RoughnessShift: lobe stretched in theta_h by (1 + m), peak reduced by (1 + m)^2
//   SpecularScale:  lobe multiplied by (1 + m)
//   DiffuseTint:    floor shifted by m * t_c per channel, t drawn from the seed
//   GaussianNoise:  N(0, m^2) added per bin and channel
// Magnitude 0 returns the input unchanged; invalid bins are never touched and
// the output is clamped at 0.
TabulatedBrdf distort(const TabulatedBrdf& brdf, const DistortionSpec& spec);

AnalyticBrdfParams random_ggx_material(std::uint64_t seed, std::size_t index);

struct SyntheticPair {
  std::string material;
  std::size_t level = 0;
  std::shared_ptr<const TabulatedBrdf> reference;
  TabulatedBrdf distorted;
  DistortionSpec spec;
  double severity = 0.0;
};

// Streams materials x levels pairs to `visit` in (material, level) order.
// Distorted tables are generated one at a time, so memory stays bounded.
// `threads` parallelizes over levels of one material without changing output.
void for_each_synthetic_pair(std::size_t n_materials, const std::vector<DistortionSpec>& levels,
                             std::uint64_t seed, const std::function<void(SyntheticPair&&)>& visit,
                             int threads = 1);

std::vector<SyntheticPair> gen_dataset(std::size_t n_materials, const std::vector<DistortionSpec>& levels,
                                       std::uint64_t seed, int threads = 1);

}  // namespace brdfnqm
