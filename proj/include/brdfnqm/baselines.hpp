#pragma once

// The eight BRDF-space error metrics used as baselines.

#include <array>
#include <string_view>

#include "brdfnqm/sampling.hpp"

namespace brdfnqm {

enum class MetricKind { RMSE, MAE, RMS_CRWE, MA_CRWE, RMS_LogE, MA_LogE, RMS_LogWE, MA_LogWE };

inline constexpr std::array<MetricKind, 8> kAllMetrics{MetricKind::RMSE,     MetricKind::MAE,
                                                       MetricKind::RMS_CRWE, MetricKind::MA_CRWE,
                                                       MetricKind::RMS_LogE, MetricKind::MA_LogE,
                                                       MetricKind::RMS_LogWE, MetricKind::MA_LogWE};

std::string_view to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view text);

enum class CosineWeight { Product, IncomingOnly };

// With w = cos(theta_i) * cos(theta_o) per direction:
//   RMSE/MAE    t(rho) = rho
//   CRWE        t(rho) = (w rho)^(1/3)
//   LogE        t(rho) = log(1 + rho)
//   LogWE       t(rho) = log(1 + w rho)
// RMS variants: sqrt(mean (t_ref - t_dist)^2); MA variants: mean |t_ref - t_dist|,
// both over all K x 3 entries. Inputs are raw reflectance.
double baseline_metric(MetricKind kind, const SampledBrdf& ref, const SampledBrdf& dist,
                       CosineWeight weight = CosineWeight::Product);

}  // namespace brdfnqm
