#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gevk/stats.hpp"

namespace gevk {

struct PairOutcome {
  std::string pair_id;
  std::size_t successes = 0;
  std::size_t trials = 0;

  /// Throws std::invalid_argument if trials == 0 or successes > trials.
  void validate() const;
  double proportion() const;

  friend bool operator==(const PairOutcome&, const PairOutcome&) = default;
};

struct PreferenceSummary {
  std::vector<PairOutcome> pairs;
  PairOutcome overall;
  /// 100 * k / n rounded half away from zero: per pair to an integer, overall to one decimal.
  std::vector<double> pair_percent;
  double overall_percent = 0.0;
};

PreferenceSummary aggregate_preferences(const std::vector<PairOutcome>& pairs);

/// Parsed survey export. Columns (by name, any order):
/// respondent_id,pair_id,choice,confidence,helpfulness,role
struct SurveyData {
  std::vector<PairOutcome> pairs;  // ordered by pair id, numeric ids numerically
  std::vector<int> confidence;     // one entry per retained row with a value
  std::vector<int> helpfulness;    // one entry per respondent (first value seen)
  std::vector<std::string> diagnostics;
  std::size_t rows_used = 0;
};

/// Malformed rows are skipped and reported as "line N: reason". A missing header or an
/// empty file throws InputError.
SurveyData parse_survey_csv(const std::string& text);
SurveyData load_survey_csv(const std::filesystem::path& path);

struct SurveyRow {
  PairOutcome outcome;
  double percent = 0.0;
  TestResult binomial;  // ci: two-sided Clopper-Pearson
};

struct SurveyReport {
  std::vector<SurveyRow> pairs;
  SurveyRow overall;
  std::pair<double, double> overall_lower_one_sided{0.0, 1.0};
  std::pair<double, double> overall_normal_lower{0.0, 1.0};
  std::pair<double, double> overall_wilson{0.0, 1.0};
  std::optional<LikertSummary> confidence;
  std::optional<TestResult> confidence_test;
  std::optional<LikertSummary> helpfulness;
  std::optional<TestResult> helpfulness_test;
  std::vector<std::string> diagnostics;
};

SurveyReport build_survey_report(const std::vector<PairOutcome>& pairs,
                                 const std::optional<LikertSummary>& confidence = std::nullopt,
                                 const std::optional<LikertSummary>& helpfulness = std::nullopt);
SurveyReport build_survey_report(const SurveyData& data);

/// ".023" style; values below `floor` print as "< .001" (or the floor's own text).
std::string format_p_value(double p, double floor = 0.001);

/// "[89.4, 100]" from a proportion interval; exact 0 and 100 print without decimals.
std::string format_percent_interval(std::pair<double, double> ci);

/// Table with columns Image Pair | Percent Choosing Optimized | Successes | p-value | 95% CI,
/// an Overall row, and notes comparing interval methods and the Likert t-tests.
std::string emit_survey_markdown(const SurveyReport& report);
std::string emit_survey_json(const SurveyReport& report);

}  // namespace gevk
