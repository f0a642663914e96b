#include "brdfnqm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "brdfnqm/errors.hpp"
#include "brdfnqm/table.hpp"

namespace brdfnqm {

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw CorrelationError("spearman needs equal-length inputs");
  if (x.size() < 2) throw CorrelationError("spearman needs at least two observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw CorrelationError("spearman is undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationReport correlate_per_material(std::span<const ScoredPair> scored, Orientation sign) {
  const double s = sign == Orientation::Negative ? -1.0 : 1.0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::vector<double> all_pred, all_gt;
  for (const auto& p : scored) {
    if (!std::isfinite(p.predicted) || !std::isfinite(p.ground_truth_jod)) {
      throw CorrelationError("non-finite score for pair " + p.pair_id);
    }
    auto& g = groups[p.material];
    g.first.push_back(s * p.predicted);
    g.second.push_back(p.ground_truth_jod);
    all_pred.push_back(s * p.predicted);
    all_gt.push_back(p.ground_truth_jod);
  }

  CorrelationReport report;
  for (const auto& [material, g] : groups) {
    if (g.first.size() < 2) {
      throw CorrelationError("material '" + material + "' has fewer than two pairs");
    }
    try {
      report.per_material[material] = spearman(g.first, g.second);
    } catch (const CorrelationError&) {
      report.excluded.push_back(material);
    }
  }
  report.n_materials = report.per_material.size();
  double sum = 0.0;
  for (const auto& kv : report.per_material) sum += kv.second;
  report.average = report.n_materials ? sum / static_cast<double>(report.n_materials)
                                      : std::numeric_limits<double>::quiet_NaN();
  try {
    report.pooled = all_pred.size() >= 2 ? spearman(all_pred, all_gt) : std::numeric_limits<double>::quiet_NaN();
  } catch (const CorrelationError&) {
    report.pooled = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

std::string format_report(std::span<const NamedReport> reports, ReportFormat format) {
  std::vector<const NamedReport*> order;
  for (const auto& r : reports) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const NamedReport* a, const NamedReport* b) {
    const double x = std::isnan(a->report.average) ? -2.0 : a->report.average;
    const double y = std::isnan(b->report.average) ? -2.0 : b->report.average;
    if (x != y) return x > y;
    return a->metric < b->metric;
  });

  TextTable t;
  if (format == ReportFormat::PlotData) {
    t.kind = "correlation-plot";
    t.columns = {"metric", "average_spearman"};
    for (const auto* r : order) t.rows.push_back({r->metric, fmt_double(r->report.average)});
  } else {
    t.kind = "correlation-report";
    t.columns = {"metric", "average_spearman", "pooled_spearman", "n_materials", "excluded"};
    for (const auto* r : order) {
      std::string excluded;
      for (const auto& m : r->report.excluded) excluded += (excluded.empty() ? "" : ",") + m;
      t.rows.push_back({r->metric, fmt_double(r->report.average), fmt_double(r->report.pooled),
                        std::to_string(r->report.n_materials), excluded.empty() ? "-" : excluded});
    }
  }
  return format_table(t);
}

void emit_report(std::span<const NamedReport> reports, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << format_report(reports, format);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace brdfnqm
