#pragma once

// Rank-correlation evaluation of quality predictors against JOD scores.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace brdfnqm {

// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation of average ranks. Requires equal lengths >= 2 and
// throws CorrelationError when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct ScoredPair {
  std::string pair_id;
  std::string material;
  double predicted = 0.0;
  double ground_truth_jod = 0.0;
};

// Positive for quality predictors (higher = better), Negative for error
// metrics, whose predictions are negated before ranking.
enum class Orientation { Positive, Negative };

struct CorrelationReport {
  std::map<std::string, double> per_material;
  std::vector<std::string> excluded;  // constant predictions or labels
  double average = 0.0;
  std::size_t n_materials = 0;
  // Spearman over all pairs at once (NaN when undefined).
  double pooled = 0.0;
};

// Spearman within each material, then the unweighted mean over materials.
CorrelationReport correlate_per_material(std::span<const ScoredPair> scored, Orientation sign);

struct NamedReport {
  std::string metric;
  CorrelationReport report;
};

enum class ReportFormat { Table, PlotData };

// Rows sorted by descending average correlation (ties by name).
std::string format_report(std::span<const NamedReport> reports, ReportFormat format);
void emit_report(std::span<const NamedReport> reports, ReportFormat format, const std::filesystem::path& path);

}  // namespace brdfnqm
