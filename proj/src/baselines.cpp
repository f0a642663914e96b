#include "brdfnqm/baselines.hpp"

#include <cmath>
#include <string>

#include "brdfnqm/errors.hpp"

namespace brdfnqm {

namespace {

constexpr std::array<std::string_view, 8> kNames{"RMSE",     "MAE",     "RMS-CRWE",  "MA-CRWE",
                                                 "RMS-LogE", "MA-LogE", "RMS-LogWE", "MA-LogWE"};

enum class Transform { Identity, CubeRootWeighted, Log, LogWeighted };

Transform transform_of(MetricKind kind) {
  switch (kind) {
    case MetricKind::RMSE:
    case MetricKind::MAE:
      return Transform::Identity;
    case MetricKind::RMS_CRWE:
    case MetricKind::MA_CRWE:
      return Transform::CubeRootWeighted;
    case MetricKind::RMS_LogE:
    case MetricKind::MA_LogE:
      return Transform::Log;
    case MetricKind::RMS_LogWE:
    case MetricKind::MA_LogWE:
      return Transform::LogWeighted;
  }
  throw ParameterError("unknown metric kind");
}

bool is_rms(MetricKind kind) {
  return kind == MetricKind::RMSE || kind == MetricKind::RMS_CRWE || kind == MetricKind::RMS_LogE ||
         kind == MetricKind::RMS_LogWE;
}

double apply(Transform t, double rho, double w) {
  switch (t) {
    case Transform::Identity:
      return rho;
    case Transform::CubeRootWeighted:
      return std::cbrt(w * rho);
    case Transform::Log:
      return std::log1p(rho);
    case Transform::LogWeighted:
      return std::log1p(w * rho);
  }
  return rho;
}

}  // namespace

std::string_view to_string(MetricKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

MetricKind parse_metric_kind(std::string_view text) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == text) return static_cast<MetricKind>(i);
  }
  throw ParameterError("unknown metric '" + std::string(text) + "'");
}

double baseline_metric(MetricKind kind, const SampledBrdf& ref, const SampledBrdf& dist, CosineWeight weight) {
  require_paired(ref, dist);
  const Transform t = transform_of(kind);
  const DirectionSet& dirs = *ref.directions;
  const std::size_t k = ref.rows();
  if (k == 0) return 0.0;

  double acc = 0.0;
  const bool rms = is_rms(kind);
  for (std::size_t i = 0; i < k; ++i) {
    const double w = weight == CosineWeight::Product ? dirs.cos_wi[i] * dirs.cos_wo[i] : dirs.cos_wi[i];
    for (int c = 0; c < 3; ++c) {
      const double d = apply(t, ref.at(i, c), w) - apply(t, dist.at(i, c), w);
      acc += rms ? d * d : std::abs(d);
    }
  }
  const double mean = acc / static_cast<double>(3 * k);
  return rms ? std::sqrt(mean) : mean;
}

}  // namespace brdfnqm
