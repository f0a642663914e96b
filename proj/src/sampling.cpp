#include "brdfnqm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brdfnqm/errors.hpp"
#include "brdfnqm/table.hpp"

namespace brdfnqm {

namespace {

constexpr double kGrazingSlack = 1e-9;

double magnitude_of(const Rgb& v, MagnitudeMode mode) {
  return mode == MagnitudeMode::Luminance ? v.luminance() : std::max({v.r, v.g, v.b});
}

// Largest-remainder allocation of `total` units over weights with per-bucket
// caps. Buckets that would exceed their cap are saturated first.
std::vector<std::size_t> allocate(std::size_t total, const std::vector<double>& weights,
                                  const std::vector<std::size_t>& caps) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> out(n, 0);
  std::vector<bool> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = caps[i] > 0;

  std::size_t remaining = total;
  while (remaining > 0) {
    double wsum = 0.0, csum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      wsum += weights[i];
      csum += static_cast<double>(caps[i]);
    }
    if (csum == 0.0) break;
    const bool use_caps = !(wsum > 0.0);
    auto weight = [&](std::size_t i) { return use_caps ? static_cast<double>(caps[i]) : weights[i]; };
    const double denom = use_caps ? csum : wsum;

    bool saturated = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const double ideal = static_cast<double>(remaining) * weight(i) / denom;
      if (ideal >= static_cast<double>(caps[i])) {
        out[i] += caps[i];
        remaining -= caps[i];
        active[i] = false;
        saturated = true;
      }
    }
    if (saturated) continue;

    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t given = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const double ideal = static_cast<double>(remaining) * weight(i) / denom;
      const auto whole = static_cast<std::size_t>(std::floor(ideal));
      out[i] += whole;
      given += whole;
      remainders.emplace_back(ideal - static_cast<double>(whole), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t left = remaining - given;
    for (const auto& [frac, i] : remainders) {
      if (left == 0) break;
      ++out[i];
      --left;
    }
    remaining = 0;
  }
  return out;
}

}  // namespace

bool same_directions(const SampledBrdf& a, const SampledBrdf& b) {
  if (!a.directions || !b.directions) return false;
  return a.directions == b.directions || a.directions->dirs == b.directions->dirs;
}

void require_paired(const SampledBrdf& a, const SampledBrdf& b) {
  if (!same_directions(a, b)) throw PairingError("reference and distorted samples use different direction sets");
  if (a.values.size() != b.values.size()) throw PairingError("sample matrices differ in size");
}

std::vector<HalfDiffCoords> build_candidate_grid(int n_theta_h, int n_theta_d, int n_phi_d) {
  if (n_theta_h < 2 || n_theta_d < 2 || n_phi_d < 2) throw ParameterError("candidate grid counts must be >= 2");
  std::vector<HalfDiffCoords> grid;
  grid.reserve(static_cast<std::size_t>(n_theta_h) * n_theta_d * n_phi_d);
  for (int i = 0; i < n_theta_h; ++i) {
    const double u = static_cast<double>(i) / (n_theta_h - 1);
    const double theta_h = kHalfPi * u * u;
    for (int j = 0; j < n_theta_d; ++j) {
      const double theta_d = kGrazingCutoff * j / (n_theta_d - 1);
      for (int k = 0; k < n_phi_d; ++k) {
        grid.push_back({theta_h, theta_d, kPi * k / n_phi_d});
      }
    }
  }
  return grid;
}

bool passes_grazing(const HalfDiffCoords& hd) {
  const auto [wi, wo] = halfdiff_to_io(hd, 0.0);
  return wi.theta <= kGrazingCutoff + kGrazingSlack && wo.theta <= kGrazingCutoff + kGrazingSlack;
}

std::vector<HalfDiffCoords> filter_grazing(const std::vector<HalfDiffCoords>& candidates) {
  std::vector<HalfDiffCoords> out;
  std::copy_if(candidates.begin(), candidates.end(), std::back_inserter(out), passes_grazing);
  return out;
}

bool canonical_less(const HalfDiffCoords& a, const HalfDiffCoords& b) {
  if (a.theta_h != b.theta_h) return a.theta_h < b.theta_h;
  if (a.theta_d != b.theta_d) return a.theta_d < b.theta_d;
  return a.phi_d < b.phi_d;
}

DirectionSet select_samples(const TabulatedBrdf& reference, const std::vector<HalfDiffCoords>& candidates,
                            std::uint64_t seed, const SelectionConfig& cfg) {
  if (cfg.k == 0) throw ParameterError("sample count must be positive");
  if (cfg.strata < 1) throw ParameterError("stratum count must be positive");

  struct Scored {
    HalfDiffCoords hd;
    double mag;
  };
  std::vector<Scored> pool;
  pool.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.theta_d == 0.0 && c.phi_d != 0.0) continue;
    if (!passes_grazing(c)) continue;
    pool.push_back({c, magnitude_of(eval_brdf(reference, c).rgb, cfg.magnitude)});
  }
  std::sort(pool.begin(), pool.end(), [](const Scored& a, const Scored& b) {
    if (a.mag != b.mag) return a.mag > b.mag;
    return canonical_less(a.hd, b.hd);
  });
  pool.erase(std::unique(pool.begin(), pool.end(), [](const Scored& a, const Scored& b) { return a.hd == b.hd; }),
             pool.end());
  const std::size_t n = pool.size();
  if (n < cfg.k) {
    throw InsufficientCandidatesError("only " + std::to_string(n) + " candidates survive filtering, " +
                                      std::to_string(cfg.k) + " required");
  }

  // Equal-count cuts, pushed forward past runs of equal magnitude.
  std::vector<std::size_t> bounds{0};
  const auto strata = static_cast<std::size_t>(cfg.strata);
  for (std::size_t s = 1; s < strata; ++s) {
    std::size_t cut = (s * n + strata / 2) / strata;
    cut = std::max(cut, bounds.back());
    while (cut > 0 && cut < n && pool[cut].mag == pool[cut - 1].mag) ++cut;
    if (cut > bounds.back() && cut < n) bounds.push_back(cut);
  }
  bounds.push_back(n);
  const std::size_t n_strata = bounds.size() - 1;

  std::vector<std::size_t> quota(n_strata, 0);
  if (cfg.k < n_strata) {
    std::fill_n(quota.begin(), cfg.k, 1);
  } else {
    std::vector<double> weights(n_strata);
    std::vector<std::size_t> caps(n_strata);
    for (std::size_t s = 0; s < n_strata; ++s) {
      double sum = 0.0;
      for (std::size_t i = bounds[s]; i < bounds[s + 1]; ++i) sum += pool[i].mag;
      const std::size_t size = bounds[s + 1] - bounds[s];
      weights[s] = sum / static_cast<double>(size);
      caps[s] = size - 1;
      quota[s] = 1;
    }
    const auto extra = allocate(cfg.k - n_strata, weights, caps);
    for (std::size_t s = 0; s < n_strata; ++s) quota[s] += extra[s];
  }

  std::vector<HalfDiffCoords> chosen;
  chosen.reserve(cfg.k);
  for (std::size_t s = 0; s < n_strata; ++s) {
    for (std::size_t i = 0; i < quota[s]; ++i) chosen.push_back(pool[bounds[s] + i].hd);
  }
  std::sort(chosen.begin(), chosen.end(), canonical_less);

  DirectionSet set;
  set.seed = seed;
  set.source_material = reference.name();
  set.dirs = std::move(chosen);
  set.cos_wi.reserve(set.dirs.size());
  set.cos_wo.reserve(set.dirs.size());
  for (const auto& hd : set.dirs) {
    const auto [wi, wo] = halfdiff_to_io(hd, 0.0);
    set.cos_wi.push_back(std::cos(wi.theta));
    set.cos_wo.push_back(std::cos(wo.theta));
  }
  return set;
}

SampledBrdf sample_brdf(const TabulatedBrdf& brdf, const DirectionSetPtr& dirs) {
  if (!dirs) throw ParameterError("sample_brdf requires a direction set");
  SampledBrdf s;
  s.directions = dirs;
  s.values.resize(3 * dirs->size());
  for (std::size_t i = 0; i < dirs->size(); ++i) {
    const Rgb v = eval_brdf(brdf, dirs->dirs[i]).rgb;
    for (int c = 0; c < 3; ++c) s.at(i, c) = v[c];
  }
  return s;
}

void save_samples(const SampledBrdf& s, const std::filesystem::path& path) {
  if (!s.directions) throw ParameterError("samples carry no direction set");
  const DirectionSet& d = *s.directions;
  TextTable t;
  t.kind = "samples";
  t.set_meta("k", std::to_string(d.size()));
  t.set_meta("seed", std::to_string(d.seed));
  t.set_meta("material", d.source_material);
  t.columns = {"theta_h", "theta_d", "phi_d", "cos_i", "cos_o", "R", "G", "B"};
  t.rows.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    t.rows.push_back({fmt_double(d.dirs[i].theta_h), fmt_double(d.dirs[i].theta_d), fmt_double(d.dirs[i].phi_d),
                      fmt_double(d.cos_wi[i]), fmt_double(d.cos_wo[i]), fmt_double(s.at(i, 0)),
                      fmt_double(s.at(i, 1)), fmt_double(s.at(i, 2))});
  }
  write_table(t, path);
}

SampledBrdf load_samples(const std::filesystem::path& path) {
  const TextTable t = read_table(path, "samples");
  const std::size_t k = parse_uint(t.meta_value("k"));
  if (t.rows.size() != k) {
    throw FormatError(path.string() + ": header says k=" + std::to_string(k) + " but file has " +
                      std::to_string(t.rows.size()) + " rows");
  }
  auto dirs = std::make_shared<DirectionSet>();
  dirs->seed = parse_uint(t.meta_value("seed"));
  dirs->source_material = t.meta_value("material");
  SampledBrdf s;
  s.values.resize(3 * k);
  const std::size_t c_th = t.column("theta_h"), c_td = t.column("theta_d"), c_pd = t.column("phi_d");
  const std::size_t c_ci = t.column("cos_i"), c_co = t.column("cos_o");
  const std::size_t c_rgb[3] = {t.column("R"), t.column("G"), t.column("B")};
  for (std::size_t i = 0; i < k; ++i) {
    const auto& row = t.rows[i];
    dirs->dirs.push_back({parse_double(row[c_th]), parse_double(row[c_td]), parse_double(row[c_pd])});
    dirs->cos_wi.push_back(parse_double(row[c_ci]));
    dirs->cos_wo.push_back(parse_double(row[c_co]));
    for (int c = 0; c < 3; ++c) {
      const double v = parse_double(row[c_rgb[c]]);
      if (!std::isfinite(v) || v < 0.0) throw FormatError(path.string() + ": reflectance must be finite and >= 0");
      s.at(i, c) = v;
    }
  }
  s.directions = std::move(dirs);
  return s;
}

}  // namespace brdfnqm
