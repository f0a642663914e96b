#include "brdfnqm/synth.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>

#include "brdfnqm/errors.hpp"
#include "brdfnqm/parallel.hpp"
#include "brdfnqm/rng.hpp"

namespace brdfnqm {

namespace {

// Cosines at every bin centre, shared by all tabulations of one resolution.
struct BinGeometry {
  std::vector<double> cos_i, cos_o, cos_h, cos_d;
};

BinGeometry compute_geometry(const TableDims& dims) {
  BinGeometry g;
  const std::size_t n = dims.bins();
  g.cos_i.resize(n);
  g.cos_o.resize(n);
  g.cos_h.resize(n);
  g.cos_d.resize(n);
  std::size_t bin = 0;
  for (int i = 0; i < dims.theta_h; ++i) {
    for (int j = 0; j < dims.theta_d; ++j) {
      for (int k = 0; k < dims.phi_d; ++k, ++bin) {
        const HalfDiffCoords hd = bin_center(dims, {i, j, k});
        const auto [wi, wo] = halfdiff_to_io(hd, 0.0);
        g.cos_i[bin] = std::cos(wi.theta);
        g.cos_o[bin] = std::cos(wo.theta);
        g.cos_h[bin] = std::cos(hd.theta_h);
        g.cos_d[bin] = std::cos(hd.theta_d);
      }
    }
  }
  return g;
}

const BinGeometry& merl_geometry() {
  static const BinGeometry g = compute_geometry(kMerlDims);
  return g;
}

struct KindInfo {
  DistortionKind kind;
  std::string_view name;
  double nominal;
};

constexpr std::array<KindInfo, 4> kKinds{{
    {DistortionKind::RoughnessShift, "RoughnessShift", 1.0},
    {DistortionKind::SpecularScale, "SpecularScale", 2.0},
    {DistortionKind::DiffuseTint, "DiffuseTint", 1.0},
    {DistortionKind::GaussianNoise, "GaussianNoise", 0.05},
}};

const KindInfo& kind_info(DistortionKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw ParameterError("unknown distortion kind " + std::to_string(static_cast<int>(kind)));
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ParameterError("invalid " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

Rgb diffuse_floor(const TabulatedBrdf& brdf) {
  Rgb floor{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  bool any = false;
  for (std::size_t b = 0; b < brdf.bin_count(); ++b) {
    if (brdf.is_invalid(b)) continue;
    any = true;
    for (int c = 0; c < 3; ++c) floor[c] = std::min(floor[c], brdf.value(c, b));
  }
  return any ? floor : Rgb{};
}

}  // namespace

void AnalyticBrdfParams::validate() const {
  for (int c = 0; c < 3; ++c) {
    if (!(diffuse[c] >= 0.0 && diffuse[c] <= 1.0)) throw ParameterError("diffuse channels must lie in [0, 1]");
    if (!(specular[c] >= 0.0 && specular[c] <= 1.0)) throw ParameterError("specular channels must lie in [0, 1]");
  }
  if (!(roughness > 0.0 && roughness <= 1.0)) throw ParameterError("roughness must lie in (0, 1]");
}

Rgb eval_analytic(const AnalyticBrdfParams& p, double cos_i, double cos_o, double cos_h, double cos_d) {
  if (cos_i <= 0.0 || cos_o <= 0.0) return {};
  const double inv_pi = 1.0 / kPi;
  Rgb out{p.diffuse.r * inv_pi, p.diffuse.g * inv_pi, p.diffuse.b * inv_pi};
  double lobe = 0.0;
  switch (p.model) {
    case AnalyticModel::Lambert:
      return out;
    case AnalyticModel::BlinnPhong: {
      const double n = p.phong_exponent();
      lobe = (n + 2.0) / (8.0 * kPi) * std::pow(std::max(cos_h, 0.0), n);
      break;
    }
    case AnalyticModel::GgxMicrofacet: {
      const double a2 = p.roughness * p.roughness;
      const double c2 = cos_h * cos_h;
      const double denom = c2 * (a2 - 1.0) + 1.0;
      const double d = a2 / (kPi * denom * denom);
      auto g1 = [a2](double c) { return 2.0 * c / (c + std::sqrt(a2 + (1.0 - a2) * c * c)); };
      const double f0 = 0.04;
      const double fresnel = (f0 + (1.0 - f0) * std::pow(1.0 - std::clamp(cos_d, 0.0, 1.0), 5.0)) / f0;
      lobe = d * g1(cos_i) * g1(cos_o) * fresnel / (4.0 * cos_i * cos_o);
      break;
    }
  }
  for (int c = 0; c < 3; ++c) out[c] += p.specular[c] * lobe;
  return out;
}

Rgb eval_analytic(const AnalyticBrdfParams& params, const SphericalDirection& wi, const SphericalDirection& wo) {
  const Vec3 in = wi.to_vector(), out = wo.to_vector();
  const Vec3 sum = in + out;
  if (sum.norm() < 1e-12) return {};
  const Vec3 h = sum.normalized();
  return eval_analytic(params, in.z, out.z, h.z, in.dot(h));
}

TabulatedBrdf tabulate(const AnalyticBrdfParams& params, std::string name) {
  params.validate();
  TabulatedBrdf brdf(std::move(name), kMerlDims);
  const BinGeometry& g = merl_geometry();
  for (std::size_t b = 0; b < brdf.bin_count(); ++b) {
    if (g.cos_i[b] <= 0.0 || g.cos_o[b] <= 0.0) {
      brdf.set_invalid(b);
      continue;
    }
    brdf.set_rgb(b, eval_analytic(params, g.cos_i[b], g.cos_o[b], g.cos_h[b], g.cos_d[b]));
  }
  return brdf;
}

std::string_view to_string(DistortionKind kind) { return kind_info(kind).name; }

DistortionKind parse_distortion_kind(std::string_view text) {
  for (const auto& k : kKinds) {
    if (k.name == text) return k.kind;
  }
  throw ParameterError("unknown distortion kind '" + std::string(text) + "'");
}

DistortionSpec parse_distortion_spec(std::string_view text) {
  const auto first = text.find(':');
  if (first == std::string_view::npos) {
    throw ParameterError("distortion level must look like Kind:magnitude[:seed], got '" + std::string(text) + "'");
  }
  DistortionSpec spec;
  spec.kind = parse_distortion_kind(text.substr(0, first));
  auto rest = text.substr(first + 1);
  const auto second = rest.find(':');
  spec.magnitude = parse_double(rest.substr(0, second), "distortion magnitude");
  if (second != std::string_view::npos) {
    const auto seed_text = rest.substr(second + 1);
    const auto* end = seed_text.data() + seed_text.size();
    const auto res = std::from_chars(seed_text.data(), end, spec.seed);
    if (res.ec != std::errc{} || res.ptr != end) {
      throw ParameterError("invalid distortion seed '" + std::string(seed_text) + "'");
    }
  }
  if (!std::isfinite(spec.magnitude) || spec.magnitude < 0.0) {
    throw ParameterError("distortion magnitude must be finite and non-negative");
  }
  return spec;
}

std::string format_distortion_spec(const DistortionSpec& spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", spec.magnitude);
  return std::string(to_string(spec.kind)) + ":" + buf + ":" + std::to_string(spec.seed);
}

double severity(const DistortionSpec& spec) { return spec.magnitude / kind_info(spec.kind).nominal; }

double synthetic_oracle_jod(double sev) { return std::clamp(10.0 * (1.0 - sev), 0.0, 10.0); }

TabulatedBrdf distort(const TabulatedBrdf& brdf, const DistortionSpec& spec) {
  kind_info(spec.kind);
  if (!std::isfinite(spec.magnitude) || spec.magnitude < 0.0) {
    throw ParameterError("distortion magnitude must be finite and non-negative");
  }
  if (spec.magnitude == 0.0) return brdf;

  TabulatedBrdf out = brdf;
  const double m = spec.magnitude;
  const std::size_t n = brdf.bin_count();

  auto store = [&out](std::size_t b, int c, double v) { out.set_value(c, b, std::max(v, 0.0)); };

  switch (spec.kind) {
    case DistortionKind::GaussianNoise:
      for (std::size_t b = 0; b < n; ++b) {
        if (brdf.is_invalid(b)) continue;
        for (int c = 0; c < 3; ++c) {
          store(b, c, brdf.value(c, b) + m * counter_normal(spec.seed, 3 * b + static_cast<std::size_t>(c)));
        }
      }
      break;
    case DistortionKind::SpecularScale: {
      const Rgb floor = diffuse_floor(brdf);
      for (std::size_t b = 0; b < n; ++b) {
        if (brdf.is_invalid(b)) continue;
        for (int c = 0; c < 3; ++c) store(b, c, floor[c] + (1.0 + m) * (brdf.value(c, b) - floor[c]));
      }
      break;
    }
    case DistortionKind::DiffuseTint: {
      const Rgb floor = diffuse_floor(brdf);
      Rgb tint;
      for (int c = 0; c < 3; ++c) tint[c] = 2.0 * counter_uniform(spec.seed, static_cast<std::uint64_t>(c)) - 1.0;
      for (std::size_t b = 0; b < n; ++b) {
        if (brdf.is_invalid(b)) continue;
        for (int c = 0; c < 3; ++c) store(b, c, brdf.value(c, b) + m * tint[c] * floor[c]);
      }
      break;
    }
    case DistortionKind::RoughnessShift: {
      const Rgb floor = diffuse_floor(brdf);
      const TableDims& dims = brdf.dims();
      const double stretch = 1.0 + m;
      const double peak = 1.0 / (stretch * stretch);
      for (int i = 0; i < dims.theta_h; ++i) {
        for (int j = 0; j < dims.theta_d; ++j) {
          for (int k = 0; k < dims.phi_d; ++k) {
            const std::size_t b = brdf.bin_index(i, j, k);
            if (brdf.is_invalid(b)) continue;
            HalfDiffCoords src = bin_center(dims, {i, j, k});
            src.theta_h /= stretch;
            const BinIndex si = lookup_bin(dims, src);
            const std::size_t sb = brdf.bin_index(si.theta_h, si.theta_d, si.phi_d);
            for (int c = 0; c < 3; ++c) {
              const double excess = brdf.is_invalid(sb) ? 0.0 : brdf.value(c, sb) - floor[c];
              store(b, c, floor[c] + peak * excess);
            }
          }
        }
      }
      break;
    }
  }
  return out;
}

AnalyticBrdfParams random_ggx_material(std::uint64_t seed, std::size_t index) {
  const std::uint64_t s = stream_seed(seed, static_cast<std::uint64_t>(index));
  auto u = [s](std::uint64_t key, double lo, double hi) { return lo + (hi - lo) * counter_uniform(s, key); };
  AnalyticBrdfParams p;
  p.model = AnalyticModel::GgxMicrofacet;
  for (int c = 0; c < 3; ++c) {
    p.diffuse[c] = u(static_cast<std::uint64_t>(c), 0.02, 0.6);
    p.specular[c] = u(static_cast<std::uint64_t>(3 + c), 0.2, 1.0);
  }
  p.roughness = u(6, 0.05, 0.6);
  return p;
}

void for_each_synthetic_pair(std::size_t n_materials, const std::vector<DistortionSpec>& levels,
                             std::uint64_t seed, const std::function<void(SyntheticPair&&)>& visit, int threads) {
  if (levels.empty()) throw ParameterError("at least one distortion level is required");
  if (n_materials == 0) throw ParameterError("n_materials must be at least 1");
  for (const auto& lv : levels) kind_info(lv.kind);

  char name[32];
  for (std::size_t mi = 0; mi < n_materials; ++mi) {
    std::snprintf(name, sizeof(name), "synth_%03zu", mi);
    auto reference = std::make_shared<const TabulatedBrdf>(tabulate(random_ggx_material(seed, mi), name));

    std::vector<SyntheticPair> pairs(levels.size(), SyntheticPair{{}, 0, nullptr, TabulatedBrdf("", {1, 1, 1}), {}, 0.0});
    parallel_for(levels.size(), threads, [&](std::size_t li) {
      DistortionSpec spec = levels[li];
      spec.seed = stream_seed(levels[li].seed, stream_seed(seed, static_cast<std::uint64_t>(mi)));
      SyntheticPair& p = pairs[li];
      p.material = name;
      p.level = li;
      p.reference = reference;
      p.distorted = distort(*reference, spec);
      p.distorted.set_name(std::string(name) + "_l" + std::to_string(li));
      p.spec = spec;
      p.severity = severity(levels[li]);
    });
    for (auto& p : pairs) visit(std::move(p));
  }
}

std::vector<SyntheticPair> gen_dataset(std::size_t n_materials, const std::vector<DistortionSpec>& levels,
                                       std::uint64_t seed, int threads) {
  std::vector<SyntheticPair> out;
  for_each_synthetic_pair(
      n_materials, levels, seed, [&out](SyntheticPair&& p) { out.push_back(std::move(p)); }, threads);
  return out;
}

}  // namespace brdfnqm
