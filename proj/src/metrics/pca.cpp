#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "gevk/giqa.hpp"

namespace gevk {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct CovarianceEigen {
  Eigen::VectorXd mean;
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match values
};

CovarianceEigen covariance_eigen(const EmbeddingMatrix& features) {
  const auto n = static_cast<Eigen::Index>(features.n_rows());
  const auto d = static_cast<Eigen::Index>(features.dims());
  RowMatrix x = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                    features.values().data(), n, d)
                    .cast<double>();
  CovarianceEigen out;
  out.mean = x.colwise().mean().transpose();
  x.rowwise() -= out.mean.transpose();
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("pca: eigendecomposition failed");
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

std::size_t rank_of(const Eigen::VectorXd& descending) {
  if (descending.size() == 0 || !(descending[0] > 0.0)) return 0;
  const double cutoff = descending[0] * kPcaRankTolerance;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < descending.size(); ++i) {
    if (descending[i] > cutoff) ++r;
  }
  return r;
}

}  // namespace

std::size_t pca_numerical_rank(const EmbeddingMatrix& features) {
  if (features.n_rows() < 2) return 0;
  return rank_of(covariance_eigen(features).values);
}

PcaModel pca_fit(const EmbeddingMatrix& features, std::size_t q) {
  const std::size_t n = features.n_rows();
  const std::size_t d = features.dims();
  if (n < 2) throw InputError("pca needs at least 2 rows");
  if (q < 1 || q > std::min(n - 1, d)) {
    throw InputError("pca: q = " + std::to_string(q) + " outside [1, " + std::to_string(std::min(n - 1, d)) + "]");
  }
  const auto eig = covariance_eigen(features);
  const std::size_t rank = rank_of(eig.values);
  if (q > rank) {
    throw InputError("pca: q = " + std::to_string(q) + " exceeds numerical rank " + std::to_string(rank));
  }

  PcaModel model;
  model.dims = d;
  model.q = q;
  model.mean.assign(eig.mean.data(), eig.mean.data() + d);
  model.components.resize(q * d);
  model.eigenvalues.resize(q);
  double total = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) total += std::max(eig.values[i], 0.0);
  double kept = 0.0;
  for (std::size_t c = 0; c < q; ++c) {
    Eigen::VectorXd v = eig.vectors.col(static_cast<Eigen::Index>(c));
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (std::abs(v[j]) > 1e-12) {
        if (v[j] < 0) v = -v;
        break;
      }
    }
    std::copy(v.data(), v.data() + d, model.components.begin() + static_cast<std::ptrdiff_t>(c * d));
    model.eigenvalues[c] = eig.values[static_cast<Eigen::Index>(c)];
    kept += std::max(model.eigenvalues[c], 0.0);
  }
  model.explained_variance = total > 0.0 ? kept / total : 0.0;
  return model;
}

std::vector<double> pca_project(const PcaModel& model, std::span<const double> x) {
  if (x.size() != model.dims) {
    throw std::invalid_argument("pca_project: vector has " + std::to_string(x.size()) + " dims, model expects " +
                                std::to_string(model.dims));
  }
  std::vector<double> centered(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) centered[j] = x[j] - model.mean[j];
  std::vector<double> out(model.q, 0.0);
  for (std::size_t c = 0; c < model.q; ++c) {
    const auto comp = model.component(c);
    double acc = 0.0;
    for (std::size_t j = 0; j < model.dims; ++j) acc += comp[j] * centered[j];
    out[c] = acc;
  }
  return out;
}

std::vector<double> pca_project(const PcaModel& model, std::span<const float> x) {
  std::vector<double> as_double(x.begin(), x.end());
  return pca_project(model, std::span<const double>(as_double));
}

}  // namespace gevk
