#include "gevk/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace gevk {

using nlohmann::json;

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  throw InputError("unknown split '" + std::string(text) + "'");
}

void SplitRatios::validate() const {
  for (double r : {train, val, test}) {
    if (!(r >= 0.0 && r <= 1.0)) throw InputError("split ratios must lie in [0, 1]");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw InputError("split ratios must sum to 1");
  }
}

void DatasetManifest::validate() const {
  split_ratios.validate();
  std::unordered_set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) throw InputError("duplicate record id '" + r.id + "'");
  }
}

void to_json(json& j, const ImageRecord& record) {
  j = json{{"id", record.id},
           {"source_uri", record.source_uri},
           {"prompt", record.prompt},
           {"negative_prompts", record.negative_prompts},
           {"split", record.split ? json(to_string(*record.split)) : json(nullptr)},
           {"variant", record.variant ? json(record.variant->str()) : json(nullptr)},
           {"metadata", record.metadata}};
}

void from_json(const json& j, ImageRecord& record) {
  record.id = j.at("id").get<std::string>();
  record.source_uri = j.value("source_uri", "");
  record.prompt = j.value("prompt", "");
  record.negative_prompts = j.value("negative_prompts", std::vector<std::string>{});
  record.split.reset();
  if (j.contains("split") && !j["split"].is_null()) record.split = parse_split(j["split"].get<std::string>());
  record.variant.reset();
  if (j.contains("variant") && !j["variant"].is_null()) {
    record.variant = ModelVariantId::parse(j["variant"].get<std::string>());
  }
  record.metadata = j.value("metadata", std::map<std::string, std::string>{});
}

void to_json(json& j, const DatasetManifest& manifest) {
  const auto& r = manifest.split_ratios;
  j = json{{"records", manifest.records},
           {"split_ratios", {r.train, r.val, r.test}},
           {"seed", manifest.seed},
           {"feature_source", manifest.feature_source ? json(*manifest.feature_source) : json(nullptr)}};
}

void from_json(const json& j, DatasetManifest& manifest) {
  manifest.records = j.value("records", std::vector<ImageRecord>{});
  if (j.contains("split_ratios")) {
    const auto ratios = j.at("split_ratios").get<std::vector<double>>();
    if (ratios.size() != 3) throw InputError("split_ratios must have three entries");
    manifest.split_ratios = {ratios[0], ratios[1], ratios[2]};
  }
  manifest.seed = j.value("seed", std::uint64_t{0});
  manifest.feature_source.reset();
  if (j.contains("feature_source") && !j["feature_source"].is_null()) {
    manifest.feature_source = j["feature_source"].get<std::string>();
  }
}

std::string dump_manifest(const DatasetManifest& manifest) {
  return json(manifest).dump(2) + "\n";
}

DatasetManifest parse_manifest(const std::string& text) {
  DatasetManifest manifest;
  try {
    manifest = json::parse(text).get<DatasetManifest>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
  manifest.validate();
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str());
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write manifest " + path.string());
  out << dump_manifest(manifest);
  if (!out) throw InputError("write failed for " + path.string());
}

SplitCounts count_splits(const DatasetManifest& manifest) {
  SplitCounts c;
  for (const auto& r : manifest.records) {
    if (!r.split) continue;
    switch (*r.split) {
      case Split::train: ++c.train; break;
      case Split::val: ++c.val; break;
      case Split::test: ++c.test; break;
    }
  }
  return c;
}

namespace {

// floor(ratio * n), tolerant of products like 0.1 * 30 landing a hair below an integer.
std::size_t floor_share(double ratio, std::size_t n) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

// Unbiased draw from [0, bound]; mt19937_64 output is fully specified, std::uniform_int_distribution is not.
std::uint64_t draw_at_most(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == std::numeric_limits<std::uint64_t>::max()) return rng();
  const std::uint64_t range = bound + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % range;
}

}  // namespace

SplitOutcome split_dataset(const DatasetManifest& manifest) {
  manifest.validate();
  const std::size_t n = manifest.records.size();
  if (n < 3) throw InputError("fewer than 3 records (" + std::to_string(n) + ")");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return manifest.records[a].id < manifest.records[b].id;
  });

  std::mt19937_64 rng(manifest.seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[draw_at_most(rng, i)]);
  }

  SplitOutcome out{manifest, {}, {}};
  out.counts.val = floor_share(manifest.split_ratios.val, n);
  out.counts.test = floor_share(manifest.split_ratios.test, n);
  out.counts.train = n - out.counts.val - out.counts.test;

  for (std::size_t pos = 0; pos < n; ++pos) {
    Split s = Split::train;
    if (pos < out.counts.val) {
      s = Split::val;
    } else if (pos < out.counts.val + out.counts.test) {
      s = Split::test;
    }
    out.manifest.records[order[pos]].split = s;
  }

  if (out.counts.val == 0) out.warnings.push_back("validation split is empty for " + std::to_string(n) + " records");
  if (out.counts.test == 0) out.warnings.push_back("test split is empty for " + std::to_string(n) + " records");
  return out;
}

std::vector<std::string> default_hdg_vocabulary() {
  return {"open shelving", "transparent cabinetry", "non-slip flooring", "under-cabinet lighting"};
}

std::vector<std::string> load_hdg_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vocabulary " + path.string());
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    phrases.push_back(line.substr(first, last - first + 1));
  }
  return phrases;
}

void annotate_prompt(ImageRecord& record, const std::vector<std::string>& phrases,
                     const std::vector<std::string>& vocabulary) {
  std::string prompt;
  for (const auto& p : phrases) {
    if (std::find(vocabulary.begin(), vocabulary.end(), p) == vocabulary.end()) {
      throw InputError("'" + p + "' is not in the prompt vocabulary");
    }
    if (!prompt.empty()) prompt += ", ";
    prompt += p;
  }
  record.prompt = std::move(prompt);
}

}  // namespace gevk
