#include <nlohmann/json.hpp>

#include "gevk/giqa.hpp"

namespace gevk {

using nlohmann::json;

ScoreSeries giqa_gmm_score(const GmmModel& model, const PcaModel& pca, const EmbeddingMatrix& generated,
                           ModelVariantId variant) {
  if (generated.dims() != pca.dims) {
    throw InputError("giqa_gmm: generated features have " + std::to_string(generated.dims()) +
                     " dims, reference has " + std::to_string(pca.dims));
  }
  if (pca.q != model.dims) throw InputError("giqa_gmm: PCA output size does not match the mixture");
  std::map<std::string, double> scores;
  for (std::size_t i = 0; i < generated.n_rows(); ++i) {
    scores[generated.row_ids()[i]] = gmm_loglik(model, pca_project(pca, generated.row(i)));
  }
  return ScoreSeries::make(Metric::giqa_gmm, variant, std::move(scores));
}

ScoreSeries giqa_knn_score(const KnnIndex& index, const EmbeddingMatrix& generated, ModelVariantId variant,
                           KnnScoreKind kind) {
  if (generated.dims() != index.reference().dims()) {
    throw InputError("giqa_knn: generated features have " + std::to_string(generated.dims()) +
                     " dims, reference has " + std::to_string(index.reference().dims()));
  }
  std::map<std::string, double> scores;
  for (std::size_t i = 0; i < generated.n_rows(); ++i) {
    const auto row = generated.row_as_double(i);
    scores[generated.row_ids()[i]] = knn_score(index, row, kind);
  }
  auto series = ScoreSeries::make(Metric::giqa_knn, variant, std::move(scores));
  if (kind == KnnScoreKind::negative_log_distance) series.orientation = Orientation::higher_better;
  return series;
}

void to_json(json& j, const PcaModel& model) {
  j = json{{"dims", model.dims},
           {"q", model.q},
           {"mean", model.mean},
           {"components", model.components},
           {"eigenvalues", model.eigenvalues},
           {"explained_variance", model.explained_variance}};
}

void from_json(const json& j, PcaModel& model) {
  model.dims = j.at("dims").get<std::size_t>();
  model.q = j.at("q").get<std::size_t>();
  model.mean = j.at("mean").get<std::vector<double>>();
  model.components = j.at("components").get<std::vector<double>>();
  model.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
  model.explained_variance = j.at("explained_variance").get<double>();
  if (model.mean.size() != model.dims || model.components.size() != model.q * model.dims ||
      model.eigenvalues.size() != model.q) {
    throw InputError("pca model: array sizes do not match dims/q");
  }
}

void to_json(json& j, const GmmModel& model) {
  j = json{{"k", model.k},
           {"dims", model.dims},
           {"weights", model.weights},
           {"means", model.means},
           {"variances", model.variances},
           {"variance_floor", model.variance_floor}};
}

void from_json(const json& j, GmmModel& model) {
  model.k = j.at("k").get<std::size_t>();
  model.dims = j.at("dims").get<std::size_t>();
  model.weights = j.at("weights").get<std::vector<double>>();
  model.means = j.at("means").get<std::vector<double>>();
  model.variances = j.at("variances").get<std::vector<double>>();
  model.variance_floor = j.at("variance_floor").get<double>();
  if (model.weights.size() != model.k || model.means.size() != model.k * model.dims ||
      model.variances.size() != model.k * model.dims) {
    throw InputError("gmm model: array sizes do not match k/dims");
  }
  for (double v : model.variances) {
    if (!(v > 0.0)) throw InputError("gmm model: variances must be positive");
  }
}

}  // namespace gevk
