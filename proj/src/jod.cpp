#include "brdfnqm/jod.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "brdfnqm/errors.hpp"
#include "brdfnqm/table.hpp"

namespace brdfnqm {

namespace {

using Vec3d = Eigen::Vector3d;

Vec3d to_vec(const JodRegressionParams& p) { return {p.b1, p.b2, p.b3}; }
JodRegressionParams from_vec(const Vec3d& v) { return {v[0], v[1], v[2]}; }

Eigen::VectorXd residuals(std::span<const CalibrationPoint> pts, const Vec3d& p) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(pts.size()));
  const JodRegressionParams params = from_vec(p);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    r[static_cast<Eigen::Index>(i)] = jod_from_deitp(pts[i].deitp, params) - pts[i].jod;
  }
  return r;
}

double half_sq(const Eigen::VectorXd& r) { return 0.5 * r.squaredNorm(); }

}  // namespace

double jod_from_deitp(double deitp, const JodRegressionParams& p) {
  if (!std::isfinite(deitp)) throw DomainError("Delta E_ITP must be finite");
  if (deitp <= 1e-9) return 10.0;
  const double powered = std::pow(std::max(deitp, 0.0), p.b3);
  const double z = p.b1 * (-powered - p.b2);
  // 1 - 1/(1+e^z) = 1/(1+e^-z); the second form avoids inf/inf.
  const double jod = 10.0 / (1.0 + std::exp(-z));
  if (std::isnan(jod)) return 10.0;
  return std::clamp(jod, 0.0, 10.0);
}

std::string_view to_string(LmTermination t) {
  switch (t) {
    case LmTermination::RelativeCostChange:
      return "relative-cost-change";
    case LmTermination::ZeroResidual:
      return "zero-residual";
    case LmTermination::ZeroGradient:
      return "zero-gradient";
    case LmTermination::MaxIterations:
      return "max-iterations";
    case LmTermination::DampingExhausted:
      return "damping-exhausted";
  }
  return "unknown";
}

JodFit fit_jod_regression(std::span<const CalibrationPoint> points, const JodRegressionParams& init,
                          const LmOptions& opt) {
  if (points.size() < 3) throw ParameterError("JOD regression needs at least 3 calibration points");
  std::set<double> distinct;
  for (const auto& pt : points) {
    if (!std::isfinite(pt.deitp) || !std::isfinite(pt.jod) || pt.deitp < 0.0) {
      throw ParameterError("calibration points must be finite with Delta E >= 0");
    }
    distinct.insert(pt.deitp);
  }
  if (distinct.size() < 3) throw ParameterError("JOD regression needs at least 3 distinct Delta E values");

  const auto m = static_cast<Eigen::Index>(points.size());
  Vec3d p = to_vec(init);
  Eigen::VectorXd r = residuals(points, p);
  double cost = half_sq(r);

  JodFit fit;
  fit.initial_cost = cost;
  fit.cost_history.push_back(cost);
  double lambda = opt.lambda_init;
  bool ever_solved = false;

  for (fit.iterations = 0; fit.iterations < opt.max_iterations; ++fit.iterations) {
    if (cost == 0.0) {
      fit.termination = LmTermination::ZeroResidual;
      break;
    }
    Eigen::MatrixXd jac(m, 3);
    for (int j = 0; j < 3; ++j) {
      const double h = opt.fd_step * std::max(std::abs(p[j]), 1e-3);
      Vec3d hi = p, lo = p;
      hi[j] += h;
      lo[j] -= h;
      jac.col(j) = (residuals(points, hi) - residuals(points, lo)) / (2.0 * h);
    }
    const Eigen::Matrix3d a = jac.transpose() * jac;
    const Vec3d g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= 1e-300 || !g.allFinite()) {
      fit.termination = LmTermination::ZeroGradient;
      break;
    }

    bool accepted = false;
    double new_cost = cost;
    while (lambda <= opt.lambda_max) {
      Eigen::Matrix3d damped = a;
      for (int j = 0; j < 3; ++j) damped(j, j) += lambda * (a(j, j) > 0.0 ? a(j, j) : 1.0);
      Eigen::FullPivLU<Eigen::Matrix3d> lu(damped);
      if (lu.isInvertible()) {
        ever_solved = true;
        const Vec3d step = lu.solve(-g);
        const Vec3d candidate = p + step;
        const Eigen::VectorXd rc = residuals(points, candidate);
        const double c = half_sq(rc);
        if (std::isfinite(c) && c < cost) {
          p = candidate;
          r = rc;
          new_cost = c;
          lambda = std::max(lambda / opt.lambda_down, 1e-300);
          accepted = true;
          break;
        }
      }
      lambda *= opt.lambda_up;
    }
    if (!accepted) {
      if (!ever_solved) {
        throw FitError("normal equations singular at every damping level (cost " + fmt_double(cost) + ", |g| " +
                       fmt_double(g.norm()) + ")");
      }
      fit.termination = LmTermination::DampingExhausted;
      break;
    }
    const double rel = (cost - new_cost) / cost;
    cost = new_cost;
    fit.cost_history.push_back(cost);
    if (rel < opt.rel_tol) {
      fit.termination = LmTermination::RelativeCostChange;
      ++fit.iterations;
      break;
    }
  }
  fit.params = from_vec(p);
  fit.cost = cost;
  return fit;
}

std::vector<JodLabel> label_dataset(std::span<const std::pair<std::string, double>> deitp_by_pair,
                                    const JodRegressionParams& p) {
  std::vector<JodLabel> out;
  out.reserve(deitp_by_pair.size());
  for (const auto& [id, de] : deitp_by_pair) out.push_back({id, jod_from_deitp(de, p)});
  return out;
}

void save_jod_params(const JodRegressionParams& p, const std::filesystem::path& path) {
  TextTable t;
  t.kind = "jod-params";
  t.columns = {"key", "value"};
  t.rows = {{"b1", fmt_double(p.b1)}, {"b2", fmt_double(p.b2)}, {"b3", fmt_double(p.b3)}};
  write_table(t, path);
}

JodRegressionParams load_jod_params(const std::filesystem::path& path) {
  const TextTable t = read_table(path, "jod-params");
  JodRegressionParams p;
  bool seen[3] = {false, false, false};
  for (const auto& row : t.rows) {
    const std::string& key = row[t.column("key")];
    const double v = parse_double(row[t.column("value")]);
    if (key == "b1") {
      p.b1 = v;
      seen[0] = true;
    } else if (key == "b2") {
      p.b2 = v;
      seen[1] = true;
    } else if (key == "b3") {
      p.b3 = v;
      seen[2] = true;
    }
  }
  if (!(seen[0] && seen[1] && seen[2])) throw FormatError(path.string() + ": missing b1/b2/b3");
  return p;
}

std::vector<CalibrationPoint> load_calibration(const std::filesystem::path& path) {
  const TextTable t = read_table(path, "calibration");
  std::vector<CalibrationPoint> pts;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    pts.push_back({parse_double(t.cell(i, "deitp")), parse_double(t.cell(i, "jod"))});
  }
  return pts;
}

void save_calibration(std::span<const CalibrationPoint> points, const std::filesystem::path& path) {
  TextTable t;
  t.kind = "calibration";
  t.columns = {"deitp", "jod"};
  for (const auto& p : points) t.rows.push_back({fmt_double(p.deitp), fmt_double(p.jod)});
  write_table(t, path);
}

}  // namespace brdfnqm
