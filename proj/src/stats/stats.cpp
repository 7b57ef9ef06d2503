#include "gevk/stats.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gevk/special_functions.hpp"

namespace gevk {

namespace {

struct Neumaier {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

// C(n, i) for i = 0..n while it fits in uint64; nullopt entries once it overflows.
std::vector<std::optional<std::uint64_t>> exact_binomials(std::size_t n) {
  std::vector<std::optional<std::uint64_t>> out(n + 1);
  // Use symmetry so the row only overflows when its middle does.
  std::uint64_t c = 1;
  bool ok = true;
  for (std::size_t i = 0; i <= n / 2; ++i) {
    if (ok) {
      out[i] = c;
      out[n - i] = c;
    }
    if (i == n / 2) break;
    std::uint64_t prod;
    // C(n, i+1) = C(n, i) * (n - i) / (i + 1)
    if (!ok || __builtin_mul_overflow(c, static_cast<std::uint64_t>(n - i), &prod)) {
      ok = false;
      continue;
    }
    c = prod / (i + 1);
  }
  return out;
}

void check_counts(std::size_t k, std::size_t n) {
  if (n == 0) throw std::invalid_argument("binomial: n must be positive");
  if (k > n) throw std::invalid_argument("binomial: k exceeds n");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

}  // namespace

double binomial_upper_tail(std::size_t k, std::size_t n, double p0) {
  check_counts(k, n);
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw std::invalid_argument("binomial: p0 must lie in [0, 1]");
  if (k == 0) return 1.0;
  if (p0 == 0.0) return 0.0;
  if (p0 == 1.0) return 1.0;

  const auto exact = exact_binomials(n);
  const double q0 = 1.0 - p0;
  const double log_p = std::log(p0);
  const double log_q = std::log1p(-p0);
  const double log_n_fact = log_gamma(static_cast<double>(n) + 1.0);
  Neumaier acc;
  for (std::size_t i = k; i <= n; ++i) {
    const double ii = static_cast<double>(i);
    const double rest = static_cast<double>(n - i);
    double term = 0.0;
    if (exact[i]) {
      const double pp = std::pow(p0, ii);
      const double qq = std::pow(q0, rest);
      if (pp >= std::numeric_limits<double>::min() && qq >= std::numeric_limits<double>::min()) {
        term = static_cast<double>(*exact[i]) * pp * qq;
      } else {
        term = std::exp(std::log(static_cast<double>(*exact[i])) + ii * log_p + rest * log_q);
      }
    } else {
      const double log_c = log_n_fact - log_gamma(ii + 1.0) - log_gamma(rest + 1.0);
      term = std::exp(log_c + ii * log_p + rest * log_q);
    }
    acc.add(term);
  }
  return std::min(acc.value(), 1.0);
}

TestResult binom_test_one_sided(std::size_t k, std::size_t n, double p0) {
  TestResult r;
  r.statistic = static_cast<double>(k);
  r.p_value = binomial_upper_tail(k, n, p0);
  r.ci = clopper_pearson(k, n, 0.05, IntervalSide::two_sided);
  r.method = "exact binomial, one-sided (H1: p > p0)";
  return r;
}

std::pair<double, double> clopper_pearson(std::size_t k, std::size_t n, double alpha, IntervalSide side) {
  check_counts(k, n);
  check_alpha(alpha);
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  const double tail = side == IntervalSide::two_sided ? alpha / 2.0 : alpha;
  const double lo = k == 0 ? 0.0 : beta_inv(kk, nn - kk + 1.0, tail);
  double hi = 1.0;
  if (side == IntervalSide::two_sided && k < n) hi = beta_inv(kk + 1.0, nn - kk, 1.0 - tail);
  return {lo, hi};
}

std::pair<double, double> normal_approx_lower(std::size_t k, std::size_t n, double alpha) {
  check_counts(k, n);
  check_alpha(alpha);
  const double p = static_cast<double>(k) / static_cast<double>(n);
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double lo = p - z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return {std::max(lo, 0.0), 1.0};
}

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double alpha) {
  check_counts(k, n);
  check_alpha(alpha);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(centre - half, 0.0), std::min(centre + half, 1.0)};
}

void LikertSummary::validate() const {
  if (scale_min >= scale_max) throw std::invalid_argument("likert: empty scale");
  if (n < 2) throw std::invalid_argument("likert: need at least two responses");
  if (!(sd >= 0.0) || !std::isfinite(sd)) throw std::invalid_argument("likert: sd must be non-negative");
  if (!(mean >= scale_min && mean <= scale_max)) {
    throw std::invalid_argument("likert: mean outside [" + std::to_string(scale_min) + ", " +
                                std::to_string(scale_max) + "]");
  }
}

LikertSummary LikertSummary::from_samples(std::span<const int> values, int scale_min, int scale_max) {
  LikertSummary s;
  s.scale_min = scale_min;
  s.scale_max = scale_max;
  s.n = values.size();
  if (s.n < 2) throw std::invalid_argument("likert: need at least two responses");
  double sum = 0.0;
  for (int v : values) {
    if (v < scale_min || v > scale_max) throw std::invalid_argument("likert: response out of range");
    sum += v;
  }
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (int v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

TestResult one_sample_t(const LikertSummary& summary, double mu0) {
  summary.validate();
  const double n = static_cast<double>(summary.n);
  const double df = n - 1.0;
  const double se = summary.sd / std::sqrt(n);
  const double diff = summary.mean - mu0;
  TestResult r;
  r.df = df;
  r.method = "one-sample t, one-sided (H1: mean > mu0)";
  if (se == 0.0) throw std::invalid_argument("t-test: zero standard deviation (degenerate sample)");
  r.statistic = diff / se;
  r.p_value = student_t_upper_tail(r.statistic, df);
  const double tcrit = student_t_quantile_upper(0.025, df);
  r.ci = {summary.mean - tcrit * se, summary.mean + tcrit * se};
  return r;
}

TestResult one_sample_t(std::span<const double> samples, double mu0) {
  if (samples.size() < 2) throw std::invalid_argument("t-test: need at least two samples");
  Neumaier acc;
  for (double v : samples) acc.add(v);
  const double n = static_cast<double>(samples.size());
  const double mean = acc.value() / n;
  Neumaier ss;
  for (double v : samples) ss.add((v - mean) * (v - mean));
  LikertSummary s;
  s.mean = mean;
  s.sd = std::sqrt(ss.value() / (n - 1.0));
  s.n = samples.size();
  s.scale_min = std::numeric_limits<int>::min();
  s.scale_max = std::numeric_limits<int>::max();
  return one_sample_t(s, mu0);
}

}  // namespace gevk
