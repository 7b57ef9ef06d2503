#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gevk/giqa.hpp"

namespace gevk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Uniform in [0, 1) from the top 53 bits; the generator's output sequence is fully specified.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double squared_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

/// Per-component log normalizer: log w - 0.5 * sum log(2 pi var).
std::vector<double> log_normalizers(const GmmModel& m) {
  std::vector<double> out(m.k);
  for (std::size_t c = 0; c < m.k; ++c) {
    double s = 0.0;
    for (double v : m.variance(c)) s += std::log(2.0 * std::numbers::pi * v);
    out[c] = (m.weights[c] > 0.0 ? std::log(m.weights[c]) : kNegInf) - 0.5 * s;
  }
  return out;
}

void component_logs(const GmmModel& m, std::span<const double> norms, const double* x, std::span<double> out) {
  for (std::size_t c = 0; c < m.k; ++c) {
    if (norms[c] == kNegInf) {
      out[c] = kNegInf;
      continue;
    }
    const double* mu = m.means.data() + c * m.dims;
    const double* var = m.variances.data() + c * m.dims;
    double q = 0.0;
    for (std::size_t j = 0; j < m.dims; ++j) {
      const double t = x[j] - mu[j];
      q += t * t / var[j];
    }
    out[c] = norms[c] - 0.5 * q;
  }
}

std::vector<std::size_t> kmeanspp_seeds(std::span<const double> data, std::size_t n, std::size_t d, std::size_t k,
                                        std::mt19937_64& rng) {
  std::vector<std::size_t> seeds;
  seeds.push_back(static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (seeds.size() < k) {
    const double* last = data.data() + seeds.back() * d;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(data.data() + i * d, last, d));
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double u = unit_uniform(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n));
    }
    seeds.push_back(pick);
  }
  return seeds;
}

}  // namespace

GmmFit gmm_fit(std::span<const double> data, std::size_t n, std::size_t d, const GmmOptions& options) {
  const std::size_t k = options.k;
  if (d == 0 || data.size() != n * d) throw std::invalid_argument("gmm_fit: data size does not match n x d");
  if (k < 1 || k > n) {
    throw InputError("gmm_fit: K = " + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
  }
  if (!(options.tol > 0.0)) throw InputError("gmm_fit: tol must be positive");
  for (double v : data) {
    if (!std::isfinite(v)) throw InputError("gmm_fit: non-finite input");
  }

  // Global per-coordinate statistics (population variance).
  std::vector<double> global_mean(d, 0.0);
  std::vector<double> global_var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) global_mean[j] += data[i * d + j];
  }
  for (auto& m : global_mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double t = data[i * d + j] - global_mean[j];
      global_var[j] += t * t;
    }
  }
  double mean_var = 0.0;
  for (auto& v : global_var) {
    v /= static_cast<double>(n);
    mean_var += v;
  }
  mean_var /= static_cast<double>(d);

  GmmFit fit;
  GmmModel& m = fit.model;
  m.k = k;
  m.dims = d;
  m.variance_floor = std::max(options.floor_scale * mean_var, options.min_floor);
  m.weights.assign(k, 1.0 / static_cast<double>(k));
  m.means.resize(k * d);
  m.variances.resize(k * d);

  std::mt19937_64 rng(options.seed);
  const auto seeds = kmeanspp_seeds(data, n, d, k, rng);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy_n(data.data() + seeds[c] * d, d, m.means.begin() + static_cast<std::ptrdiff_t>(c * d));
    for (std::size_t j = 0; j < d; ++j) m.variances[c * d + j] = std::max(global_var[j], m.variance_floor);
  }

  std::vector<double> resp(n * k);
  std::vector<double> logs(k);
  std::vector<double> row_ll(n);
  for (std::size_t iter = 0;; ++iter) {
    // E-step
    const auto norms = log_normalizers(m);
    for (std::size_t i = 0; i < n; ++i) {
      component_logs(m, norms, data.data() + i * d, logs);
      const double lse = log_sum_exp(logs);
      row_ll[i] = lse;
      for (std::size_t c = 0; c < k; ++c) resp[i * k + c] = logs[c] == kNegInf ? 0.0 : std::exp(logs[c] - lse);
    }
    const double ll = compensated_sum(row_ll);
    fit.loglik_history.push_back(ll);
    if (iter > 0) {
      const double prev = fit.loglik_history[fit.loglik_history.size() - 2];
      if ((ll - prev) / static_cast<double>(n) < options.tol) {
        fit.converged = true;
        break;
      }
    }
    if (iter == options.max_iter) break;

    // M-step: exact maximizer subject to var >= floor.
    for (std::size_t c = 0; c < k; ++c) {
      double nk = 0.0;
      for (std::size_t i = 0; i < n; ++i) nk += resp[i * k + c];
      m.weights[c] = nk / static_cast<double>(n);
      if (nk <= 0.0) continue;
      double* mu = m.means.data() + c * d;
      double* var = m.variances.data() + c * d;
      std::fill(mu, mu + d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = resp[i * k + c];
        if (r == 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) mu[j] += r * data[i * d + j];
      }
      for (std::size_t j = 0; j < d; ++j) mu[j] /= nk;
      std::fill(var, var + d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = resp[i * k + c];
        if (r == 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) {
          const double t = data[i * d + j] - mu[j];
          var[j] += r * t * t;
        }
      }
      for (std::size_t j = 0; j < d; ++j) var[j] = std::max(var[j] / nk, m.variance_floor);
    }
    double wsum = 0.0;
    for (double w : m.weights) wsum += w;
    for (double& w : m.weights) w /= wsum;
    fit.iterations = iter + 1;
  }
  return fit;
}

GmmFit gmm_fit(const EmbeddingMatrix& features, const GmmOptions& options) {
  std::vector<double> data(features.values().begin(), features.values().end());
  return gmm_fit(data, features.n_rows(), features.dims(), options);
}

double gmm_loglik(const GmmModel& model, std::span<const double> x) {
  if (x.size() != model.dims) {
    throw std::invalid_argument("gmm_loglik: vector has " + std::to_string(x.size()) + " dims, model expects " +
                                std::to_string(model.dims));
  }
  const auto norms = log_normalizers(model);
  std::vector<double> logs(model.k);
  component_logs(model, norms, x.data(), logs);
  return log_sum_exp(logs);
}

}  // namespace gevk
