#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gevk/embedding.hpp"
#include "gevk/scores.hpp"

namespace gevk {

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

/// Orthonormal projection onto the leading principal directions of a feature set.
struct PcaModel {
  std::vector<double> mean;        ///< d
  std::vector<double> components;  ///< q x d, row-major, descending eigenvalue
  std::vector<double> eigenvalues; ///< q, sample-covariance eigenvalues
  std::size_t dims = 0;
  std::size_t q = 0;
  /// Share of total variance captured by the retained components.
  double explained_variance = 0.0;

  std::span<const double> component(std::size_t i) const { return {components.data() + i * dims, dims}; }
};

/// Directions with eigenvalue below this fraction of the largest one do not count toward numerical rank.
inline constexpr double kPcaRankTolerance = 1e-10;

/// Number of covariance eigenvalues above the rank tolerance.
std::size_t pca_numerical_rank(const EmbeddingMatrix& features);

/// Top-q eigenvectors of the (n-1)-normalized sample covariance. Each component's
/// first nonzero coordinate is positive. Requires n_rows >= 2 and
/// 1 <= q <= min(n_rows - 1, dims, numerical rank).
PcaModel pca_fit(const EmbeddingMatrix& features, std::size_t q);

/// components * (x - mean)
std::vector<double> pca_project(const PcaModel& model, std::span<const double> x);
std::vector<double> pca_project(const PcaModel& model, std::span<const float> x);

// ---------------------------------------------------------------------------
// Diagonal Gaussian mixture
// ---------------------------------------------------------------------------

struct GmmModel {
  std::size_t k = 0;
  std::size_t dims = 0;
  std::vector<double> weights;    ///< k, sums to 1
  std::vector<double> means;      ///< k x dims
  std::vector<double> variances;  ///< k x dims, every entry >= variance_floor
  double variance_floor = 0.0;

  std::span<const double> mean(std::size_t c) const { return {means.data() + c * dims, dims}; }
  std::span<const double> variance(std::size_t c) const { return {variances.data() + c * dims, dims}; }

  friend bool operator==(const GmmModel&, const GmmModel&) = default;
};

struct GmmOptions {
  std::size_t k = 8;
  std::size_t max_iter = 200;
  /// Stop once the mean per-sample log-likelihood improves by less than this.
  double tol = 1e-6;
  std::uint64_t seed = 0;
  /// variance floor = floor_scale * mean per-coordinate variance of the data.
  double floor_scale = 1e-6;
  /// Used when the data has (almost) no variance at all.
  double min_floor = 1e-12;
};

struct GmmFit {
  GmmModel model;
  /// Total data log-likelihood before each M-step, followed by the final value.
  std::vector<double> loglik_history;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Maximum-likelihood diagonal GMM by EM with k-means++ seeding (mt19937_64).
/// Variances are floored, which keeps every M-step a constrained maximizer, so
/// the training log-likelihood never decreases.
GmmFit gmm_fit(std::span<const double> data, std::size_t n_rows, std::size_t dims, const GmmOptions& options);
GmmFit gmm_fit(const EmbeddingMatrix& features, const GmmOptions& options);

/// log sum_k w_k N(x; mu_k, diag(var_k)), evaluated with log-sum-exp.
double gmm_loglik(const GmmModel& model, std::span<const double> x);

// ---------------------------------------------------------------------------
// KNN
// ---------------------------------------------------------------------------

enum class KnnScoreKind {
  mean_distance,          ///< lower_cost
  negative_log_distance,  ///< -ln(mean distance), higher_better
};

/// Exact (exhaustive) neighbor index over real-image reference features.
class KnnIndex {
 public:
  KnnIndex(EmbeddingMatrix reference, std::size_t k);

  const EmbeddingMatrix& reference() const { return reference_; }
  std::size_t k() const { return k_; }

  /// Euclidean distances to the k nearest reference rows, ascending.
  std::vector<double> nearest_distances(std::span<const double> x) const;

 private:
  EmbeddingMatrix reference_;
  std::size_t k_;
};

/// Mean Euclidean distance from x to its k nearest reference rows.
double knn_score(const KnnIndex& index, std::span<const double> x);
double knn_score(const KnnIndex& index, std::span<const double> x, KnnScoreKind kind);

// ---------------------------------------------------------------------------
// Series scoring
// ---------------------------------------------------------------------------

/// Per-image gmm_loglik(pca_project(row)); orientation higher_better.
ScoreSeries giqa_gmm_score(const GmmModel& model, const PcaModel& pca, const EmbeddingMatrix& generated,
                           ModelVariantId variant);

/// Per-image knn_score of each generated row; orientation follows `kind`.
ScoreSeries giqa_knn_score(const KnnIndex& index, const EmbeddingMatrix& generated, ModelVariantId variant,
                           KnnScoreKind kind = KnnScoreKind::mean_distance);

// ---------------------------------------------------------------------------
// Persistence (JSON, full round-trip precision)
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const PcaModel& model);
void from_json(const nlohmann::json& j, PcaModel& model);
void to_json(nlohmann::json& j, const GmmModel& model);
void from_json(const nlohmann::json& j, GmmModel& model);

}  // namespace gevk
