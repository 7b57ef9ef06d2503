#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gevk/cli.hpp"
#include "gevk/clip.hpp"
#include "gevk/embedding.hpp"

namespace gevk::cli {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

KnnScoreKind parse_knn_kind(const std::string& text) {
  if (text == "mean_distance") return KnnScoreKind::mean_distance;
  if (text == "negative_log_distance" || text == "neg_log") return KnnScoreKind::negative_log_distance;
  throw InputError("unknown knn_variant '" + text + "'");
}

EmbeddingMatrix open_features(const std::filesystem::path& path, const std::string& what) {
  if (path.empty()) throw InputError(what + ": path not configured");
  if (!std::filesystem::exists(path)) throw InputError(what + ": " + path.string() + " does not exist");
  return read_embeddings(path);
}

}  // namespace

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  try {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    if (j.contains("manifest_path")) c.manifest_path = resolve(base_dir, j["manifest_path"].get<std::string>());
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    if (j.contains("formats")) {
      c.formats.clear();
      for (const auto& f : j["formats"]) c.formats.push_back(parse_report_format(f.get<std::string>()));
    }
    if (j.contains("embeddings")) {
      for (const auto& [name, entry] : j["embeddings"].items()) {
        MetricInputs in;
        if (entry.contains("reference_path")) in.reference_path = resolve(base_dir, entry["reference_path"].get<std::string>());
        if (entry.contains("prompt_path")) in.prompt_path = resolve(base_dir, entry["prompt_path"].get<std::string>());
        for (const auto& [variant, path] : entry.at("generated_paths").items()) {
          in.generated_paths[ModelVariantId::parse(variant)] = resolve(base_dir, path.get<std::string>());
        }
        if (!in.generated_paths.count(ModelVariantId(VariantLabel::M0))) {
          throw InputError("embeddings." + name + ": generated_paths needs the baseline M0");
        }
        c.embeddings[parse_metric(name)] = std::move(in);
      }
    }
    if (j.contains("giqa")) {
      const auto& g = j["giqa"];
      c.giqa.k = g.value("K", c.giqa.k);
      c.giqa.q = g.value("q", c.giqa.q);
      c.giqa.max_iter = g.value("max_iter", c.giqa.max_iter);
      c.giqa.tol = g.value("tol", c.giqa.tol);
      c.giqa.seed = g.value("seed", c.giqa.seed);
      c.giqa.knn_k = g.value("knn_K", c.giqa.knn_k);
      if (g.contains("knn_variant")) c.giqa.knn_kind = parse_knn_kind(g["knn_variant"].get<std::string>());
    }
    if (j.contains("normalization")) {
      const auto& n = j["normalization"];
      c.normalization.kind = parse_normalization_kind(n.value("kind", std::string("global_min_max")));
      if (n.contains("bounds")) {
        c.normalization.bounds = std::make_pair(n["bounds"].at(0).get<double>(), n["bounds"].at(1).get<double>());
      }
      c.normalization.invert_lower_cost = n.value("invert_lower_cost", false);
      c.normalization.validate();
    }
    if (j.contains("raw_means")) {
      for (const auto& [name, means] : j["raw_means"].items()) {
        auto& target = c.raw_means[parse_metric(name)];
        for (const auto& [variant, value] : means.items()) target[ModelVariantId::parse(variant)] = value.get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

MetricScores score_metric(Metric metric, const RunConfig& config) {
  const auto it = config.embeddings.find(metric);
  if (it == config.embeddings.end()) throw InputError("no embeddings configured for " + to_string(metric));
  const MetricInputs& in = it->second;
  MetricScores out;

  if (metric == Metric::clip) {
    const auto prompts = open_features(in.prompt_path, "clip prompt_path");
    for (const auto& [variant, path] : in.generated_paths) {
      const auto images = open_features(path, "clip " + variant.str());
      if (images.dims() != prompts.dims()) {
        throw InputError("clip: " + variant.str() + " images have " + std::to_string(images.dims()) +
                         " dims, prompts have " + std::to_string(prompts.dims()));
      }
      std::map<std::string, double> per_image;
      for (std::size_t i = 0; i < images.n_rows(); ++i) {
        const auto& id = images.row_ids()[i];
        const std::size_t p = prompts.find(id);
        if (p < prompts.n_rows()) {
          per_image[id] = clip_score(images.row(i), prompts.row(p));
        } else {
          double sum = 0.0;
          for (std::size_t r = 0; r < prompts.n_rows(); ++r) sum += clip_score(images.row(i), prompts.row(r));
          per_image[id] = sum / static_cast<double>(prompts.n_rows());
        }
      }
      out.series.push_back(ScoreSeries::make(metric, variant, std::move(per_image)));
    }
    return out;
  }

  const auto reference = open_features(in.reference_path, to_string(metric) + " reference_path");
  if (metric == Metric::giqa_gmm) {
    const std::size_t rank = pca_numerical_rank(reference);
    const std::size_t q =
        std::min({config.giqa.q, reference.n_rows() > 1 ? reference.n_rows() - 1 : std::size_t{1}, reference.dims(),
                  std::max<std::size_t>(rank, 1)});
    const auto pca = pca_fit(reference, q);
    std::vector<double> projected;
    projected.reserve(reference.n_rows() * q);
    for (std::size_t i = 0; i < reference.n_rows(); ++i) {
      const auto z = pca_project(pca, reference.row(i));
      projected.insert(projected.end(), z.begin(), z.end());
    }
    GmmOptions opts;
    opts.k = config.giqa.k;
    opts.max_iter = config.giqa.max_iter;
    opts.tol = config.giqa.tol;
    opts.seed = config.giqa.seed;
    const auto fit = gmm_fit(projected, reference.n_rows(), q, opts);
    for (const auto& [variant, path] : in.generated_paths) {
      out.series.push_back(giqa_gmm_score(fit.model, pca, open_features(path, "giqa_gmm " + variant.str()), variant));
    }
    json model{{"pca", pca},
               {"gmm", fit.model},
               {"fit", {{"iterations", fit.iterations}, {"converged", fit.converged}, {"loglik_history", fit.loglik_history}}},
               {"options", {{"K", opts.k}, {"q", q}, {"max_iter", opts.max_iter}, {"tol", opts.tol}, {"seed", opts.seed}}}};
    out.model_json = model.dump(2) + "\n";
    return out;
  }

  const KnnIndex index(reference, config.giqa.knn_k);
  for (const auto& [variant, path] : in.generated_paths) {
    out.series.push_back(
        giqa_knn_score(index, open_features(path, "giqa_knn " + variant.str()), variant, config.giqa.knn_kind));
  }
  return out;
}

}  // namespace gevk::cli
