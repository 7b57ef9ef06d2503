#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gevk/common.hpp"

namespace gevk {

enum class Split { train, val, test };

std::string to_string(Split split);
Split parse_split(std::string_view text);

struct ImageRecord {
  std::string id;
  std::string source_uri;
  std::string prompt;
  std::vector<std::string> negative_prompts;
  std::optional<Split> split;
  std::optional<ModelVariantId> variant;
  /// Source metadata kept for attribution (author, page URL, license, local path, ...).
  std::map<std::string, std::string> metadata;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  /// Throws InputError unless every ratio is in [0,1] and they sum to 1 within 1e-9.
  void validate() const;

  friend bool operator==(const SplitRatios&, const SplitRatios&) = default;
};

struct DatasetManifest {
  std::vector<ImageRecord> records;
  SplitRatios split_ratios;
  std::uint64_t seed = 0;
  /// Which encoder produced the features scored against this dataset, if known.
  std::optional<std::string> feature_source;

  /// Throws InputError on duplicate ids or invalid ratios.
  void validate() const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

void to_json(nlohmann::json& j, const ImageRecord& record);
void from_json(const nlohmann::json& j, ImageRecord& record);
void to_json(nlohmann::json& j, const DatasetManifest& manifest);
void from_json(const nlohmann::json& j, DatasetManifest& manifest);

/// Pretty-printed UTF-8 JSON with a trailing newline; byte-stable for equal manifests.
std::string dump_manifest(const DatasetManifest& manifest);
DatasetManifest parse_manifest(const std::string& text);
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

SplitCounts count_splits(const DatasetManifest& manifest);

struct SplitOutcome {
  DatasetManifest manifest;
  SplitCounts counts;
  std::vector<std::string> warnings;
};

/// Assigns every record to train/val/test.
///
/// Records are ordered by id, then permuted with a Fisher-Yates shuffle driven by
/// mt19937_64 seeded with `manifest.seed`. The first floor(r_val*n) permuted records
/// go to val, the next floor(r_test*n) to test, and the rest to train. Record order in
/// the returned manifest is unchanged, so the operation is idempotent for a fixed seed.
SplitOutcome split_dataset(const DatasetManifest& manifest);

/// Editable list of Home Design Guidelines phrases used as scoring prompts.
std::vector<std::string> default_hdg_vocabulary();
/// One phrase per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> load_hdg_vocabulary(const std::filesystem::path& path);

/// Sets `record.prompt` to the phrases joined by ", ". Every phrase must be in `vocabulary`.
void annotate_prompt(ImageRecord& record, const std::vector<std::string>& phrases,
                     const std::vector<std::string>& vocabulary);

}  // namespace gevk
