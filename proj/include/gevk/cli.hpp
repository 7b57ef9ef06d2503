#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gevk/common.hpp"
#include "gevk/giqa.hpp"
#include "gevk/ranking.hpp"
#include "gevk/scores.hpp"

namespace gevk::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kInputError = 2 };

struct MetricInputs {
  std::filesystem::path reference_path;  // GIQA real-image features
  std::filesystem::path prompt_path;     // CLIP prompt features
  std::map<ModelVariantId, std::filesystem::path> generated_paths;
};

struct GiqaSettings {
  std::size_t k = 8;
  std::size_t q = 64;
  std::size_t max_iter = 200;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::size_t knn_k = 5;
  KnnScoreKind knn_kind = KnnScoreKind::mean_distance;
};

/// One JSON document describing a reproducible run. Relative paths are resolved
/// against the directory holding the config file.
struct RunConfig {
  std::optional<std::filesystem::path> manifest_path;
  std::map<Metric, MetricInputs> embeddings;
  GiqaSettings giqa;
  NormalizationStrategy normalization;
  std::filesystem::path output_dir = ".";
  std::vector<ReportFormat> formats{ReportFormat::markdown, ReportFormat::csv, ReportFormat::json};
  /// Per-metric means that bypass scoring in `report`.
  std::map<Metric, std::map<ModelVariantId, double>> raw_means;
};

RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

struct MetricScores {
  std::vector<ScoreSeries> series;  // ordered by variant
  /// Fitted PCA + GMM parameters for giqa_gmm, empty otherwise.
  std::string model_json;
};

/// Scores every variant of one metric from its embedding files.
MetricScores score_metric(Metric metric, const RunConfig& config);

/// Replaces `path` with `content`. An existing file is first copied to
/// "<name>.bak-<UTC timestamp>"; returns that backup path, if any.
std::optional<std::filesystem::path> replace_with_backup(const std::filesystem::path& path, const std::string& content);

/// Entry point. Data goes to `out`, logging to `err`. Returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gevk::cli
