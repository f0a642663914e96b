#pragma once

// Logistic mapping from the image-space colour difference (Delta E_ITP) to
// JOD, and its Levenberg-Marquardt calibration against subjective scores.

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace brdfnqm {

struct JodRegressionParams {
  double b1 = -14.11;
  double b2 = -0.47;
  double b3 = -0.21;

  bool operator==(const JodRegressionParams&) const = default;
};

inline constexpr JodRegressionParams kReferenceJodParams{};

struct CalibrationPoint {
  double deitp = 0.0;
  double jod = 0.0;
};

// JOD = 10 * (1 - 1 / (1 + exp(b1 * (-(max(dE, 0)^b3) - b2)))), clamped to
// [0, 10]. With b3 < 0 the power diverges at 0, so dE <= 1e-9 returns the
// limit 10. Non-finite input throws DomainError.
double jod_from_deitp(double deitp, const JodRegressionParams& p = kReferenceJodParams);

struct LmOptions {
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  double lambda_max = 1e16;
  // Relative finite-difference step for the central-difference Jacobian.
  double fd_step = 1e-6;
  double rel_tol = 1e-10;
  int max_iterations = 200;
};

enum class LmTermination { RelativeCostChange, ZeroResidual, ZeroGradient, MaxIterations, DampingExhausted };

std::string_view to_string(LmTermination t);

struct JodFit {
  JodRegressionParams params;
  double initial_cost = 0.0;
  double cost = 0.0;  // 0.5 * sum of squared residuals
  int iterations = 0;
  LmTermination termination = LmTermination::MaxIterations;
  // Cost after each accepted step; non-increasing.
  std::vector<double> cost_history;
};

// Minimizes sum (jod_from_deitp(dE_i) - jod_i)^2 with damped normal
// equations (JtJ + lambda diag(JtJ)). Requires >= 3 points with >= 3
// distinct dE values (ParameterError otherwise). Throws FitError when the
// damped system is singular at every damping level.
JodFit fit_jod_regression(std::span<const CalibrationPoint> points, const JodRegressionParams& init,
                          const LmOptions& options = {});

struct JodLabel {
  std::string pair_id;
  double jod = 0.0;
};

std::vector<JodLabel> label_dataset(std::span<const std::pair<std::string, double>> deitp_by_pair,
                                    const JodRegressionParams& p = kReferenceJodParams);

// Small key-value file: "b1 <v>" lines under a versioned header.
void save_jod_params(const JodRegressionParams& p, const std::filesystem::path& path);
JodRegressionParams load_jod_params(const std::filesystem::path& path);

std::vector<CalibrationPoint> load_calibration(const std::filesystem::path& path);
void save_calibration(std::span<const CalibrationPoint> points, const std::filesystem::path& path);

}  // namespace brdfnqm
