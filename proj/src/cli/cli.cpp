#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "gevk/cli.hpp"
#include "gevk/embedding.hpp"
#include "gevk/fetch.hpp"
#include "gevk/manifest.hpp"
#include "gevk/survey.hpp"

namespace gevk::cli {

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::vector<std::string> formats;
};

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw InputError("write failed for " + path.string());
}

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

// Global flags override the config file, which overrides built-in defaults.
RunConfig effective_config(const Globals& g, bool required) {
  RunConfig c;
  if (!g.config.empty()) {
    c = load_run_config(g.config);
  } else if (required) {
    throw InputError("--config is required for this command");
  }
  if (g.seed) c.giqa.seed = *g.seed;
  if (!g.output_dir.empty()) c.output_dir = g.output_dir;
  if (!g.formats.empty()) {
    c.formats.clear();
    for (const auto& f : g.formats) c.formats.push_back(parse_report_format(f));
  }
  return c;
}

std::filesystem::path manifest_path(const std::string& flag, const RunConfig& c) {
  if (!flag.empty()) return flag;
  if (c.manifest_path) return *c.manifest_path;
  throw InputError("no manifest given (use --manifest or manifest_path in the config)");
}

void log_lines(std::ostream& err, const std::vector<std::string>& lines, const char* level) {
  for (const auto& l : lines) err << "gevk: " << level << ": " << l << "\n";
}

Orientation comparison_orientation(Metric metric, const RunConfig& c) {
  if (metric == Metric::giqa_knn && c.giqa.knn_kind == KnnScoreKind::negative_log_distance) {
    return Orientation::higher_better;
  }
  return report_orientation(metric);
}

void emit_reports(Metric metric, const std::map<ModelVariantId, double>& means, const RunConfig& c,
                  std::ostream& out, std::ostream& err) {
  const auto report = build_report(metric, means, comparison_orientation(metric, c));
  for (const auto format : c.formats) {
    const auto path = c.output_dir / ("report_" + to_string(metric) + file_extension(format));
    write_text(path, emit_report(report, format));
    err << "gevk: wrote " << path.string() << "\n";
  }
  out << "## " << to_string(metric) << "\n\n" << emit_report(report, ReportFormat::markdown) << "\n";
}

int cmd_fetch(const Globals& g, const std::string& query, std::size_t count, const std::string& manifest_flag,
              const std::string& api_key, const std::string& api_base, const std::string& download_dir, double rate,
              std::ostream& out, std::ostream& err) {
  const auto config = effective_config(g, false);
  if (count == 0) {
    err << "gevk: count is 0, nothing to fetch\n";
    return kOk;
  }
  const auto key = resolve_api_key(api_key.empty() ? std::nullopt : std::optional<std::string>(api_key));
  if (!key) throw FetchError(FetchErrc::missing_key, std::string("missing API key: set ") + kUnsplashKeyVariable);
  const auto path = manifest_path(manifest_flag, config);

  FetchOptions opts;
  if (!api_base.empty()) opts.api_base = api_base;
  if (!download_dir.empty()) opts.download_dir = download_dir;
  opts.max_requests_per_second = rate;
  const auto result = fetch_images(query, count, *key, opts);
  log_lines(err, result.diagnostics, "warning");
  if (result.records.empty()) {
    err << "gevk: error: no images fetched\n";
    return kInputError;
  }

  DatasetManifest manifest;
  if (std::filesystem::exists(path)) manifest = load_manifest(path);
  std::set<std::string> ids;
  for (const auto& r : manifest.records) ids.insert(r.id);
  std::size_t added = 0;
  for (const auto& r : result.records) {
    if (!ids.insert(r.id).second) continue;
    manifest.records.push_back(r);
    ++added;
  }
  const auto backup = replace_with_backup(path, dump_manifest(manifest));
  if (backup) err << "gevk: previous manifest saved as " << backup->string() << "\n";
  out << "fetched " << result.records.size() << ", appended " << added << " to " << path.string() << "\n";
  return kOk;
}

std::optional<SplitRatios> parse_ratios(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<double> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InputError("bad ratio '" + part + "'");
    }
  }
  if (v.size() != 3) throw InputError("--ratios needs three comma-separated values (train,val,test)");
  SplitRatios r{v[0], v[1], v[2]};
  r.validate();
  return r;
}

int cmd_split(const Globals& g, const std::string& manifest_flag, const std::string& ratios_text,
              const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto config = effective_config(g, false);
  const auto path = manifest_path(manifest_flag, config);
  auto manifest = load_manifest(path);
  if (const auto ratios = parse_ratios(ratios_text)) manifest.split_ratios = *ratios;
  if (g.seed) manifest.seed = *g.seed;
  const auto outcome = split_dataset(manifest);
  log_lines(err, outcome.warnings, "warning");
  const auto text = dump_manifest(outcome.manifest);
  if (!out_path.empty()) {
    write_text(out_path, text);
  } else {
    const auto backup = replace_with_backup(path, text);
    if (backup) err << "gevk: previous manifest saved as " << backup->string() << "\n";
  }
  out << "train " << outcome.counts.train << ", val " << outcome.counts.val << ", test " << outcome.counts.test
      << "\n";
  return kOk;
}

std::vector<Metric> selected_metrics(const std::string& metric, const RunConfig& c) {
  if (metric != "all") return {parse_metric(metric)};
  std::vector<Metric> out;
  for (const auto& [m, inputs] : c.embeddings) out.push_back(m);
  if (out.empty()) throw InputError("config has no embeddings section");
  return out;
}

NormalizationOutcome score_and_write(Metric metric, const RunConfig& c, std::ostream& err) {
  const auto scores = score_metric(metric, c);
  auto normalized = normalize_scores(scores.series, c.normalization);
  log_lines(err, normalized.warnings, "warning");
  for (const auto& s : normalized.series) {
    const auto path = c.output_dir / ("scores_" + to_string(metric) + "_" + s.variant.str() + ".csv");
    write_text(path, normalized_series_csv(s));
    err << "gevk: wrote " << path.string() << "\n";
  }
  if (!scores.model_json.empty()) write_text(c.output_dir / ("model_" + to_string(metric) + ".json"), scores.model_json);
  return normalized;
}

int cmd_score(const Globals& g, const std::string& metric, std::ostream& out, std::ostream& err) {
  const auto c = effective_config(g, true);
  for (const auto m : selected_metrics(metric, c)) {
    const auto normalized = score_and_write(m, c, err);
    for (const auto& s : normalized.series) {
      out << to_string(m) << " " << s.variant.str() << ": " << s.per_image.size() << " images\n";
    }
  }
  return kOk;
}

int cmd_report(const Globals& g, std::ostream& out, std::ostream& err) {
  const auto c = effective_config(g, true);
  if (!c.raw_means.empty()) {
    for (const auto& [metric, means] : c.raw_means) emit_reports(metric, means, c, out, err);
    if (!c.embeddings.empty()) err << "gevk: raw_means given; embeddings were not scored\n";
    return kOk;
  }
  if (c.embeddings.empty()) throw InputError("config needs raw_means or embeddings");
  std::map<Metric, std::vector<NormalizedSeries>> normalized;
  for (const auto& [metric, inputs] : c.embeddings) {
    auto outcome = score_and_write(metric, c, err);
    std::map<ModelVariantId, double> means;
    for (const auto& s : outcome.series) {
      std::vector<double> raw;
      for (const auto& [id, v] : s.per_image) raw.push_back(v.raw);
      means[s.variant] = compensated_sum(raw) / static_cast<double>(raw.size());
    }
    emit_reports(metric, means, c, out, err);
    normalized[metric] = std::move(outcome.series);
  }
  const auto averages = average_normalized(normalized);
  const auto path = c.output_dir / "figure5_normalized_means.csv";
  write_text(path, averages.csv);
  err << "gevk: wrote " << path.string() << "\n";
  return kOk;
}

int cmd_survey(const Globals& g, const std::string& csv_path, std::ostream& out, std::ostream& err) {
  const auto c = effective_config(g, false);
  const auto data = load_survey_csv(csv_path);
  log_lines(err, data.diagnostics, "skipped");
  const auto report = build_survey_report(data);
  const auto markdown = emit_survey_markdown(report);
  out << markdown;
  if (!g.output_dir.empty() || !g.config.empty()) {
    for (const auto format : c.formats) {
      if (format == ReportFormat::csv) continue;
      const auto path = c.output_dir / ("survey_report" + file_extension(format));
      write_text(path, format == ReportFormat::json ? emit_survey_json(report) : markdown);
      err << "gevk: wrote " << path.string() << "\n";
    }
  }
  return kOk;
}

}  // namespace

std::optional<std::filesystem::path> replace_with_backup(const std::filesystem::path& path, const std::string& content) {
  std::optional<std::filesystem::path> backup;
  if (std::filesystem::exists(path)) {
    const auto base = path.string() + ".bak-" + utc_stamp();
    std::filesystem::path candidate = base;
    for (int i = 1; std::filesystem::exists(candidate); ++i) candidate = base + "-" + std::to_string(i);
    std::filesystem::copy_file(path, candidate);
    backup = candidate;
  }
  auto tmp = path;
  tmp += ".tmp";
  write_text(tmp, content);
  std::filesystem::rename(tmp, path);
  return backup;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generative-image evaluation toolkit", "gevk"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--seed", g.seed, "Seed for shuffling and model fitting");
  app.add_option("--output-dir", g.output_dir, "Directory for output files");
  app.add_option("--format", g.formats, "Output formats: markdown, csv, json")->delimiter(',');

  auto* fetch = app.add_subcommand("fetch", "Search Unsplash and append records to a manifest");
  std::string query, fetch_manifest, api_key, api_base, download_dir;
  std::size_t count = 0;
  double rate = 2.0;
  fetch->add_option("--query", query, "Search terms")->required();
  fetch->add_option("--count", count, "Number of images")->required();
  fetch->add_option("--manifest", fetch_manifest, "Manifest to append to");
  fetch->add_option("--api-key", api_key, std::string("API key (default: $") + kUnsplashKeyVariable + ")");
  fetch->add_option("--api-base", api_base, "API base URL");
  fetch->add_option("--download-dir", download_dir, "Save images here");
  fetch->add_option("--rate", rate, "Maximum requests per second")->check(CLI::PositiveNumber);

  auto* split = app.add_subcommand("split", "Assign train/val/test splits");
  std::string split_manifest, ratios, split_out;
  split->add_option("--manifest", split_manifest, "Manifest to split");
  split->add_option("--ratios", ratios, "train,val,test fractions");
  split->add_option("--out", split_out, "Write here instead of updating the manifest");

  auto* score = app.add_subcommand("score", "Score generated images");
  std::string metric = "all";
  score->add_option("--metric", metric, "clip, giqa_gmm, giqa_knn or all");

  auto* report = app.add_subcommand("report", "Model-comparison tables and per-model normalized means");

  auto* survey = app.add_subcommand("survey", "Preference survey statistics");
  std::string survey_csv;
  survey->add_option("csv", survey_csv, "Survey responses")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*fetch) return cmd_fetch(g, query, count, fetch_manifest, api_key, api_base, download_dir, rate, out, err);
    if (*split) return cmd_split(g, split_manifest, ratios, split_out, out, err);
    if (*score) return cmd_score(g, metric, out, err);
    if (*report) return cmd_report(g, out, err);
    if (*survey) return cmd_survey(g, survey_csv, out, err);
  } catch (const InputError& e) {
    err << "gevk: error: " << e.what() << "\n";
    return kInputError;
  } catch (const FetchError& e) {
    err << "gevk: error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "gevk: error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "gevk: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}

}  // namespace gevk::cli
