#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gevk/giqa.hpp"

namespace gevk {

KnnIndex::KnnIndex(EmbeddingMatrix reference, std::size_t k) : reference_(std::move(reference)), k_(k) {
  if (k_ < 1 || k_ > reference_.n_rows()) {
    throw InputError("knn: K = " + std::to_string(k_) + " must be in [1, " + std::to_string(reference_.n_rows()) + "]");
  }
}

std::vector<double> KnnIndex::nearest_distances(std::span<const double> x) const {
  const std::size_t d = reference_.dims();
  if (x.size() != d) {
    throw std::invalid_argument("knn: query has " + std::to_string(x.size()) + " dims, reference has " +
                                std::to_string(d));
  }
  std::vector<double> sq(reference_.n_rows());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const auto r = reference_.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double t = x[j] - static_cast<double>(r[j]);
      s += t * t;
    }
    sq[i] = s;
  }
  std::partial_sort(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k_), sq.end());
  std::vector<double> out(k_);
  std::transform(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k_), out.begin(),
                 [](double s) { return std::sqrt(s); });
  return out;
}

double knn_score(const KnnIndex& index, std::span<const double> x) {
  const auto nearest = index.nearest_distances(x);
  double sum = 0.0;
  for (double v : nearest) sum += v;
  return sum / static_cast<double>(nearest.size());
}

double knn_score(const KnnIndex& index, std::span<const double> x, KnnScoreKind kind) {
  const double mean = knn_score(index, x);
  if (kind == KnnScoreKind::mean_distance) return mean;
  if (mean == 0.0) throw std::domain_error("knn: negative-log score undefined at zero distance");
  return -std::log(mean);
}

}  // namespace gevk
