#pragma once

// Straight-loop reimplementations used as independent references.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace oracle {

// Metric names in library order: RMSE MAE RMS-CRWE MA-CRWE RMS-LogE MA-LogE RMS-LogWE MA-LogWE.
// values are row-major (k x 3); cos arrays have k entries.
inline double metric(int kind, const std::vector<double>& a, const std::vector<double>& b,
                     const std::vector<double>& cos_i, const std::vector<double>& cos_o, bool incoming_only = false) {
  const std::size_t k = cos_i.size();
  const int family = kind / 2;
  const bool rms = kind % 2 == 0;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = incoming_only ? cos_i[i] : cos_i[i] * cos_o[i];
    for (std::size_t c = 0; c < 3; ++c) {
      double x = a[i * 3 + c], y = b[i * 3 + c];
      if (family == 1) {
        x = std::pow(w * x, 1.0 / 3.0);
        y = std::pow(w * y, 1.0 / 3.0);
      } else if (family == 2) {
        x = std::log(1.0 + x);
        y = std::log(1.0 + y);
      } else if (family == 3) {
        x = std::log(1.0 + w * x);
        y = std::log(1.0 + w * y);
      }
      total += rms ? (x - y) * (x - y) : std::fabs(x - y);
    }
  }
  total /= static_cast<double>(3 * k);
  return rms ? std::sqrt(total) : total;
}

// Rank by counting: rank = 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      if (v < x[i]) less += 1;
      if (v == x[i]) equal += 1;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

}  // namespace oracle
