#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>

namespace gevk {

struct TestResult {
  double statistic = 0.0;
  std::optional<double> df;
  double p_value = 1.0;
  /// 95% interval attached to the test (proportion or mean scale).
  std::pair<double, double> ci{0.0, 1.0};
  std::string method;
};

/// P(X >= k) for X ~ Binomial(n, p0). Exact integer binomial coefficients while they
/// fit in 64 bits, log-space terms otherwise; compensated summation throughout.
double binomial_upper_tail(std::size_t k, std::size_t n, double p0);

/// One-sided exact binomial test of H1: p > p0. ci is the two-sided 95% Clopper-Pearson interval.
TestResult binom_test_one_sided(std::size_t k, std::size_t n, double p0 = 0.5);

enum class IntervalSide { two_sided, lower_one_sided };

/// Clopper-Pearson interval for k successes in n trials at level 1 - alpha.
/// k = 0 gives lower 0; k = n gives upper 1; lower_one_sided always has upper 1.
std::pair<double, double> clopper_pearson(std::size_t k, std::size_t n, double alpha = 0.05,
                                          IntervalSide side = IntervalSide::two_sided);

/// Wald lower bound p_hat - z * sqrt(p_hat (1 - p_hat) / n), z = Phi^-1(1 - alpha/2),
/// clipped at 0. The upper end is reported as 1.
std::pair<double, double> normal_approx_lower(std::size_t k, std::size_t n, double alpha = 0.05);

/// Wilson score interval (two-sided).
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double alpha = 0.05);

struct LikertSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
  int scale_min = 1;
  int scale_max = 7;

  double midpoint() const { return 0.5 * (scale_min + scale_max); }
  /// Throws std::invalid_argument if n < 2, sd < 0, or mean lies outside the scale.
  void validate() const;

  static LikertSummary from_samples(std::span<const int> values, int scale_min = 1, int scale_max = 7);
};

/// One-sample t-test of H1: mean > mu0. ci is the two-sided 95% interval for the mean.
/// Throws std::invalid_argument when sd = 0.
TestResult one_sample_t(const LikertSummary& summary, double mu0);
TestResult one_sample_t(std::span<const double> samples, double mu0);

}  // namespace gevk
