#include "gevk/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gevk {

namespace {

constexpr double kLanczosG = 607.0 / 128.0;
constexpr std::array<double, 15> kLanczos = {
    0.99999999999999709182,     57.156235665862923517,      -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,    .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4,  .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,   -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4,  .36899182659531622704e-5,
};

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double lanczos_sum(double x) {
  double sum = 0.0;
  for (std::size_t i = kLanczos.size() - 1; i > 0; --i) sum += kLanczos[i] / (x + static_cast<double>(i));
  return sum + kLanczos[0];
}

// Continued fraction for I_x(a,b), valid (fast) for x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 10000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("reg_inc_beta: continued fraction did not converge");
}

// x^a (1-x)^b / B(a,b)
double beta_front(double a, double b, double x) {
  return std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: x must be positive");
  if (std::isinf(x)) return x;
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) {
    // Gamma(x) = Gamma(x + 1) / x keeps the Lanczos argument in its accurate range.
    return log_gamma(x + 1.0) - std::log(x);
  }
  const double t = x + kLanczosG + 0.5;
  return (x + 0.5) * std::log(t) - t + kHalfLog2Pi + std::log(lanczos_sum(x) / x);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("log_beta: a and b must be positive");
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("reg_inc_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("reg_inc_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double result;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    result = beta_front(a, b, x) * beta_continued_fraction(a, b, x) / a;
  } else {
    result = 1.0 - beta_front(b, a, 1.0 - x) * beta_continued_fraction(b, a, 1.0 - x) / b;
  }
  return std::min(std::max(result, 0.0), 1.0);
}

double beta_inv(double a, double b, double q) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta_inv: a and b must be positive");
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("beta_inv: q must lie in [0, 1]");
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;

  const double log_norm = log_beta(a, b);
  double lo = 0.0;
  double hi = 1.0;
  double x = a / (a + b);
  double best = x;
  double best_err = std::numeric_limits<double>::infinity();
  constexpr int kMaxIter = 1000;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const double f = reg_inc_beta(a, b, x) - q;
    if (std::abs(f) < best_err) {
      best = x;
      best_err = std::abs(f);
    }
    if (best_err < 1e-15) return best;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (std::nextafter(lo, 1.0) >= hi) return best;
    const double pdf = std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_norm);
    double next = (pdf > 0.0 && std::isfinite(pdf)) ? x - f / pdf : lo - 1.0;
    if (!(next > lo && next < hi) || next == x) next = 0.5 * (lo + hi);
    if (next <= lo || next >= hi) return best;
    x = next;
  }
  throw std::runtime_error("beta_inv: no convergence for a=" + std::to_string(a) + ", b=" + std::to_string(b) +
                           ", q=" + std::to_string(q));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  // Acklam's rational approximation, polished by one Halley step against erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double student_t_upper_tail(double t, double df) {
  if (!(df > 0.0)) throw std::domain_error("student_t_upper_tail: df must be positive");
  if (std::isnan(t)) throw std::domain_error("student_t_upper_tail: t is NaN");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double tail = 0.5 * reg_inc_beta(df / 2.0, 0.5, df / (df + t * t));
  return t >= 0.0 ? tail : 1.0 - tail;
}

double student_t_quantile_upper(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("student_t_quantile_upper: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  const double two_tail = p < 0.5 ? 2.0 * p : 2.0 * (1.0 - p);
  const double x = beta_inv(df / 2.0, 0.5, two_tail);
  const double t = std::sqrt(df * (1.0 - x) / x);
  return p < 0.5 ? t : -t;
}

}  // namespace gevk
