#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gevk/common.hpp"

namespace gevk {

/// Raw per-image values of one metric for one model variant, keyed by image id.
struct ScoreSeries {
  Metric metric = Metric::clip;
  ModelVariantId variant;
  std::map<std::string, double> per_image;
  Orientation orientation = Orientation::higher_better;

  /// Series with the orientation fixed for `metric`.
  static ScoreSeries make(Metric metric, ModelVariantId variant, std::map<std::string, double> per_image);

  /// Throws InputError when empty or non-finite.
  void validate() const;
};

enum class NormalizationKind { global_min_max, per_image_min_max, divide_by_global_max, fixed_bounds };

std::string to_string(NormalizationKind kind);
NormalizationKind parse_normalization_kind(std::string_view text);

struct NormalizationStrategy {
  NormalizationKind kind = NormalizationKind::global_min_max;
  /// Required for fixed_bounds, with lo < hi.
  std::optional<std::pair<double, double>> bounds;
  /// Report 1 - v for lower_cost series so that 1 always reads as "best".
  bool invert_lower_cost = false;

  void validate() const;
};

struct NormalizedScore {
  double raw = 0.0;
  double normalized = 0.0;
};

struct NormalizedSeries {
  Metric metric = Metric::clip;
  ModelVariantId variant;
  Orientation orientation = Orientation::higher_better;
  std::map<std::string, NormalizedScore> per_image;
};

struct NormalizationOutcome {
  std::vector<NormalizedSeries> series;
  std::vector<std::string> warnings;
};

/// Maps every raw value of one metric into [0, 1].
///
/// The scope of min/max is all (variant, image) cells for global strategies and one
/// image across variants for per_image_min_max. A degenerate scope (max == min, or a
/// zero maximum for divide_by_global_max) maps to 0.5 and adds a warning.
/// divide_by_global_max requires non-negative raw values.
NormalizationOutcome normalize_scores(std::span<const ScoreSeries> all_series, const NormalizationStrategy& strategy);

/// Compensated arithmetic mean of the per-image values.
double mean_score(const ScoreSeries& series);
double mean_normalized(const NormalizedSeries& series);

/// "image_id,variant,raw,normalized" CSV, LF line endings, rows ordered by image id.
std::string normalized_series_csv(const NormalizedSeries& series);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_exact(double value);

/// Compensated (Neumaier) sum.
double compensated_sum(std::span<const double> values);

}  // namespace gevk
