#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gevk/common.hpp"
#include "gevk/scores.hpp"

namespace gevk {

/// One row of a model-comparison table. Derived columns are empty for the baseline.
struct ModelSummary {
  ModelVariantId variant;
  double mean = 0.0;
  /// Quality value for higher_better, |mean| for lower_cost.
  double cost = 0.0;
  std::optional<double> pct_quality;
  std::optional<double> vs_input;
  std::optional<std::size_t> rank;

  friend bool operator==(const ModelSummary&, const ModelSummary&) = default;
};

/// Decimal places used when rendering each column.
struct ReportRounding {
  int mean = 4;
  int pct_quality = 1;
  int vs_input = 1;

  friend bool operator==(const ReportRounding&, const ReportRounding&) = default;
};

struct ModelComparisonReport {
  Metric metric = Metric::clip;
  Orientation orientation = Orientation::higher_better;
  /// Baseline first, then M1..M4.
  std::vector<ModelSummary> summaries;
  ReportRounding rounding;

  /// Throws InputError unless there is exactly one baseline and ranks are a permutation of 1..n-1.
  void validate() const;

  friend bool operator==(const ModelComparisonReport&, const ModelComparisonReport&) = default;
};

/// higher_better: the mean itself (must be positive). lower_cost: |mean| (must be non-zero).
double to_cost(double mean, Orientation orientation);

/// % Quality relative to the best non-baseline model and % change versus the baseline.
///
/// higher_better: pct = 100 * mean / best_mean,  vs = 100 * (mean - m0) / m0
/// lower_cost:    pct = 100 * best_cost / cost,  vs = 100 * (cost_m0 - cost) / cost_m0
/// A positive vs_input always means "better than the baseline".
std::vector<ModelSummary> derive_columns(const std::map<ModelVariantId, double>& means, Orientation orientation);

/// Ranks non-baseline rows 1..n by descending pct_quality; ties go to the lower label.
std::vector<ModelSummary> rank_models(std::vector<ModelSummary> summaries);

/// derive_columns followed by rank_models.
ModelComparisonReport build_report(Metric metric, const std::map<ModelVariantId, double>& means,
                                   Orientation orientation);
ModelComparisonReport build_report(Metric metric, const std::map<ModelVariantId, double>& means);

enum class ReportFormat { markdown, csv, json };

std::string to_string(ReportFormat format);
ReportFormat parse_report_format(std::string_view text);
std::string file_extension(ReportFormat format);

/// Columns Model | Mean | % Quality | vs Input | Rank. Markdown groups thousands in the
/// mean; CSV does not. JSON carries full-precision values and parses back with parse_report_json.
std::string emit_report(const ModelComparisonReport& report, ReportFormat format);
ModelComparisonReport parse_report_json(const std::string& text);

/// Round half away from zero at `places` decimals.
double round_half_away(double value, int places);
/// Fixed-point text of round_half_away(value, places); never prints "-0".
std::string format_fixed(double value, int places);

struct MetricAverages {
  std::map<ModelVariantId, std::map<Metric, double>> means;
  /// "variant,metric,mean_normalized", ordered by variant then metric.
  std::string csv;
};

/// Per-variant, per-metric mean of normalized scores. Every variant of a metric must
/// cover the same image ids; otherwise InputError names the differences.
MetricAverages average_normalized(const std::map<Metric, std::vector<NormalizedSeries>>& series_by_metric);

}  // namespace gevk
