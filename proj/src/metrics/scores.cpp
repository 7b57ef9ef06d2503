#include "gevk/scores.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "gevk/csv.hpp"

namespace gevk {

ScoreSeries ScoreSeries::make(Metric metric, ModelVariantId variant, std::map<std::string, double> per_image) {
  return ScoreSeries{metric, variant, std::move(per_image), series_orientation(metric)};
}

void ScoreSeries::validate() const {
  if (per_image.empty()) throw InputError("score series " + to_string(metric) + "/" + variant.str() + " is empty");
  for (const auto& [id, v] : per_image) {
    if (!std::isfinite(v)) throw InputError("non-finite score for image '" + id + "'");
  }
}

std::string to_string(NormalizationKind kind) {
  switch (kind) {
    case NormalizationKind::global_min_max: return "global_min_max";
    case NormalizationKind::per_image_min_max: return "per_image_min_max";
    case NormalizationKind::divide_by_global_max: return "divide_by_global_max";
    case NormalizationKind::fixed_bounds: return "fixed_bounds";
  }
  return "unknown";
}

NormalizationKind parse_normalization_kind(std::string_view text) {
  for (auto k : {NormalizationKind::global_min_max, NormalizationKind::per_image_min_max,
                 NormalizationKind::divide_by_global_max, NormalizationKind::fixed_bounds}) {
    if (text == to_string(k)) return k;
  }
  throw InputError("unknown normalization strategy '" + std::string(text) + "'");
}

void NormalizationStrategy::validate() const {
  if (kind == NormalizationKind::fixed_bounds) {
    if (!bounds) throw InputError("fixed_bounds normalization needs bounds");
    if (!(std::isfinite(bounds->first) && std::isfinite(bounds->second) && bounds->first < bounds->second)) {
      throw InputError("fixed_bounds normalization needs finite lo < hi");
    }
  }
}

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

double min_max(double v, const Range& r) { return std::clamp((v - r.lo) / (r.hi - r.lo), 0.0, 1.0); }

}  // namespace

NormalizationOutcome normalize_scores(std::span<const ScoreSeries> all_series, const NormalizationStrategy& strategy) {
  strategy.validate();
  if (all_series.empty()) throw InputError("nothing to normalize");
  const Metric metric = all_series.front().metric;
  Range global;
  std::map<std::string, Range> per_image;
  for (const auto& s : all_series) {
    s.validate();
    if (s.metric != metric) throw InputError("normalize_scores: series mix metrics");
    for (const auto& [id, v] : s.per_image) {
      global.add(v);
      per_image[id].add(v);
    }
  }

  NormalizationOutcome out;
  const std::string scope_name = to_string(metric);
  bool global_degenerate = false;
  switch (strategy.kind) {
    case NormalizationKind::global_min_max:
      global_degenerate = global.hi == global.lo;
      break;
    case NormalizationKind::divide_by_global_max:
      if (global.lo < 0.0) throw InputError("divide_by_global_max needs non-negative scores for " + scope_name);
      global_degenerate = global.hi == 0.0;
      break;
    case NormalizationKind::per_image_min_max:
      for (const auto& [id, r] : per_image) {
        if (r.hi == r.lo) out.warnings.push_back(scope_name + ": image '" + id + "' has a constant score across variants; mapped to 0.5");
      }
      break;
    case NormalizationKind::fixed_bounds:
      break;
  }
  if (global_degenerate) out.warnings.push_back(scope_name + ": all scores are equal; mapped to 0.5");

  for (const auto& s : all_series) {
    NormalizedSeries ns{s.metric, s.variant, s.orientation, {}};
    for (const auto& [id, v] : s.per_image) {
      double n = 0.5;
      switch (strategy.kind) {
        case NormalizationKind::global_min_max:
          if (!global_degenerate) n = min_max(v, global);
          break;
        case NormalizationKind::per_image_min_max: {
          const auto& r = per_image.at(id);
          if (r.hi != r.lo) n = min_max(v, r);
          break;
        }
        case NormalizationKind::divide_by_global_max:
          if (!global_degenerate) n = std::clamp(v / global.hi, 0.0, 1.0);
          break;
        case NormalizationKind::fixed_bounds: {
          const Range r{strategy.bounds->first, strategy.bounds->second};
          n = min_max(std::clamp(v, r.lo, r.hi), r);
          break;
        }
      }
      if (strategy.invert_lower_cost && s.orientation == Orientation::lower_cost) n = 1.0 - n;
      ns.per_image[id] = {v, n};
    }
    out.series.push_back(std::move(ns));
  }
  return out;
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

double mean_score(const ScoreSeries& series) {
  if (series.per_image.empty()) throw InputError("mean of an empty score series");
  std::vector<double> v;
  v.reserve(series.per_image.size());
  for (const auto& [id, x] : series.per_image) v.push_back(x);
  return compensated_sum(v) / static_cast<double>(v.size());
}

double mean_normalized(const NormalizedSeries& series) {
  if (series.per_image.empty()) throw InputError("mean of an empty score series");
  std::vector<double> v;
  v.reserve(series.per_image.size());
  for (const auto& [id, x] : series.per_image) v.push_back(x.normalized);
  return compensated_sum(v) / static_cast<double>(v.size());
}

std::string format_exact(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string normalized_series_csv(const NormalizedSeries& series) {
  std::string out = "image_id,variant,raw,normalized\n";
  for (const auto& [id, s] : series.per_image) {
    out += csv::escape(id) + "," + series.variant.str() + "," + format_exact(s.raw) + "," + format_exact(s.normalized) + "\n";
  }
  return out;
}

}  // namespace gevk
