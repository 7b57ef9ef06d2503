#include "gevk/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

namespace gevk {

using nlohmann::json;

double to_cost(double mean, Orientation orientation) {
  if (!std::isfinite(mean)) throw InputError("non-finite mean");
  if (orientation == Orientation::higher_better) {
    if (!(mean > 0.0)) throw InputError("higher_better comparison needs positive means");
    return mean;
  }
  if (mean == 0.0) throw InputError("zero mean under lower_cost");
  return std::abs(mean);
}

std::vector<ModelSummary> derive_columns(const std::map<ModelVariantId, double>& means, Orientation orientation) {
  const auto base_it = means.find(ModelVariantId(VariantLabel::M0));
  if (base_it == means.end()) throw InputError("missing baseline (M0)");
  if (means.size() < 2) throw InputError("no non-baseline models to compare");
  if (orientation == Orientation::lower_cost) {
    const bool any_neg = std::any_of(means.begin(), means.end(), [](const auto& kv) { return kv.second < 0; });
    const bool any_pos = std::any_of(means.begin(), means.end(), [](const auto& kv) { return kv.second > 0; });
    if (any_neg && any_pos) throw InputError("mixed-sign means cannot be compared by magnitude");
  }

  std::vector<ModelSummary> rows;
  for (const auto& [variant, mean] : means) rows.push_back({variant, mean, to_cost(mean, orientation), {}, {}, {}});

  const ModelSummary& base = rows.front();
  const ModelSummary* best = nullptr;
  for (const auto& r : rows) {
    if (r.variant.is_baseline()) continue;
    const bool better = orientation == Orientation::higher_better ? (!best || r.cost > best->cost)
                                                                  : (!best || r.cost < best->cost);
    if (better) best = &r;
  }

  const double best_cost = best->cost;
  const double base_cost = base.cost;
  for (auto& r : rows) {
    if (r.variant.is_baseline()) continue;
    if (orientation == Orientation::higher_better) {
      r.pct_quality = 100.0 * (r.cost / best_cost);
      r.vs_input = 100.0 * ((r.cost - base_cost) / base_cost);
    } else {
      r.pct_quality = 100.0 * (best_cost / r.cost);
      r.vs_input = 100.0 * ((base_cost - r.cost) / base_cost);
    }
  }
  return rows;
}

std::vector<ModelSummary> rank_models(std::vector<ModelSummary> summaries) {
  std::vector<ModelSummary*> contenders;
  for (auto& s : summaries) {
    s.rank.reset();
    if (s.variant.is_baseline()) continue;
    if (!s.pct_quality) throw InputError("rank_models: derive_columns has not been applied");
    contenders.push_back(&s);
  }
  std::stable_sort(contenders.begin(), contenders.end(), [](const ModelSummary* a, const ModelSummary* b) {
    if (*a->pct_quality != *b->pct_quality) return *a->pct_quality > *b->pct_quality;
    return a->variant < b->variant;
  });
  for (std::size_t i = 0; i < contenders.size(); ++i) contenders[i]->rank = i + 1;
  return summaries;
}

ModelComparisonReport build_report(Metric metric, const std::map<ModelVariantId, double>& means,
                                   Orientation orientation) {
  ModelComparisonReport report{metric, orientation, rank_models(derive_columns(means, orientation)), {}};
  report.validate();
  return report;
}

ModelComparisonReport build_report(Metric metric, const std::map<ModelVariantId, double>& means) {
  return build_report(metric, means, report_orientation(metric));
}

void ModelComparisonReport::validate() const {
  std::size_t baselines = 0;
  std::set<std::size_t> ranks;
  std::set<ModelVariantId> seen;
  for (const auto& s : summaries) {
    if (!seen.insert(s.variant).second) throw InputError("duplicate variant " + s.variant.str() + " in report");
    if (s.variant.is_baseline()) {
      ++baselines;
      if (s.pct_quality || s.vs_input || s.rank) throw InputError("baseline row must not carry derived columns");
    } else {
      if (!s.rank) throw InputError("unranked model " + s.variant.str());
      ranks.insert(*s.rank);
    }
  }
  if (baselines != 1) throw InputError("report needs exactly one baseline");
  const std::size_t n = summaries.size() - 1;
  if (ranks.size() != n || (n > 0 && (*ranks.begin() != 1 || *ranks.rbegin() != n))) {
    throw InputError("ranks are not a permutation of 1.." + std::to_string(n));
  }
}

std::string to_string(ReportFormat format) {
  switch (format) {
    case ReportFormat::markdown: return "markdown";
    case ReportFormat::csv: return "csv";
    case ReportFormat::json: return "json";
  }
  return "unknown";
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "markdown" || text == "md") return ReportFormat::markdown;
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  throw InputError("unsupported format '" + std::string(text) + "'");
}

std::string file_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::markdown: return ".md";
    case ReportFormat::csv: return ".csv";
    case ReportFormat::json: return ".json";
  }
  return "";
}

double round_half_away(double value, int places) {
  const double scale = std::pow(10.0, places);
  return std::round(value * scale) / scale;
}

std::string format_fixed(double value, int places) {
  double r = round_half_away(value, places);
  if (r == 0.0) r = 0.0;  // drop the sign of -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, r);
  return buf;
}

namespace {

constexpr const char* kDash = "—";

std::string group_thousands(const std::string& fixed) {
  const bool negative = !fixed.empty() && fixed[0] == '-';
  const std::string body = negative ? fixed.substr(1) : fixed;
  const auto dot = body.find('.');
  std::string integer = body.substr(0, dot);
  const std::string fraction = dot == std::string::npos ? "" : body.substr(dot);
  std::string grouped;
  for (std::size_t i = 0; i < integer.size(); ++i) {
    if (i > 0 && (integer.size() - i) % 3 == 0) grouped += ',';
    grouped += integer[i];
  }
  return (negative ? "-" : "") + grouped + fraction;
}

struct Cells {
  std::string model, mean, pct, vs, rank;
};

Cells cells(const ModelSummary& s, const ReportRounding& rounding, bool grouped) {
  Cells c;
  c.model = s.variant.str();
  c.mean = format_fixed(s.mean, rounding.mean);
  if (grouped) c.mean = group_thousands(c.mean);
  c.pct = s.pct_quality ? format_fixed(*s.pct_quality, rounding.pct_quality) + "%" : kDash;
  if (s.vs_input) {
    const auto text = format_fixed(*s.vs_input, rounding.vs_input);
    c.vs = (text[0] == '-' ? text : "+" + text) + "%";
  } else {
    c.vs = kDash;
  }
  c.rank = s.rank ? "#" + std::to_string(*s.rank) : kDash;
  return c;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string emit_report(const ModelComparisonReport& report, ReportFormat format) {
  report.validate();
  std::string out;
  switch (format) {
    case ReportFormat::markdown:
      out = "| Model | Mean | % Quality | vs Input | Rank |\n|---|---:|---:|---:|---:|\n";
      for (const auto& s : report.summaries) {
        const auto c = cells(s, report.rounding, true);
        out += "| " + c.model + " | " + c.mean + " | " + c.pct + " | " + c.vs + " | " + c.rank + " |\n";
      }
      return out;
    case ReportFormat::csv:
      out = "Model,Mean,% Quality,vs Input,Rank\n";
      for (const auto& s : report.summaries) {
        const auto c = cells(s, report.rounding, false);
        out += c.model + "," + c.mean + "," + c.pct + "," + c.vs + "," + c.rank + "\n";
      }
      return out;
    case ReportFormat::json: {
      json rows = json::array();
      for (const auto& s : report.summaries) {
        rows.push_back({{"variant", s.variant.str()},
                        {"mean", s.mean},
                        {"cost", s.cost},
                        {"pct_quality", optional_json(s.pct_quality)},
                        {"vs_input", optional_json(s.vs_input)},
                        {"rank", s.rank ? json(*s.rank) : json(nullptr)}});
      }
      const json j{{"metric", to_string(report.metric)},
                   {"orientation", to_string(report.orientation)},
                   {"rounding",
                    {{"mean", report.rounding.mean},
                     {"pct_quality", report.rounding.pct_quality},
                     {"vs_input", report.rounding.vs_input}}},
                   {"summaries", rows}};
      return j.dump(2) + "\n";
    }
  }
  throw InputError("unsupported format");
}

ModelComparisonReport parse_report_json(const std::string& text) {
  ModelComparisonReport report;
  try {
    const auto j = json::parse(text);
    report.metric = parse_metric(j.at("metric").get<std::string>());
    report.orientation = parse_orientation(j.at("orientation").get<std::string>());
    const auto& r = j.at("rounding");
    report.rounding = {r.at("mean").get<int>(), r.at("pct_quality").get<int>(), r.at("vs_input").get<int>()};
    for (const auto& row : j.at("summaries")) {
      ModelSummary s;
      s.variant = ModelVariantId::parse(row.at("variant").get<std::string>());
      s.mean = row.at("mean").get<double>();
      s.cost = row.at("cost").get<double>();
      if (!row.at("pct_quality").is_null()) s.pct_quality = row["pct_quality"].get<double>();
      if (!row.at("vs_input").is_null()) s.vs_input = row["vs_input"].get<double>();
      if (!row.at("rank").is_null()) s.rank = row["rank"].get<std::size_t>();
      report.summaries.push_back(s);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report json: ") + e.what());
  }
  report.validate();
  return report;
}

MetricAverages average_normalized(const std::map<Metric, std::vector<NormalizedSeries>>& series_by_metric) {
  MetricAverages out;
  for (const auto& [metric, list] : series_by_metric) {
    if (list.empty()) continue;
    std::set<std::string> reference_ids;
    for (const auto& [id, v] : list.front().per_image) reference_ids.insert(id);
    std::string problems;
    for (const auto& s : list) {
      std::set<std::string> ids;
      for (const auto& [id, v] : s.per_image) {
        ids.insert(id);
        if (!(v.normalized >= 0.0 && v.normalized <= 1.0)) {
          throw InputError(to_string(metric) + "/" + s.variant.str() + ": value for '" + id + "' is not normalized");
        }
      }
      std::string missing, extra;
      for (const auto& id : reference_ids) {
        if (!ids.count(id)) missing += (missing.empty() ? "" : ", ") + id;
      }
      for (const auto& id : ids) {
        if (!reference_ids.count(id)) extra += (extra.empty() ? "" : ", ") + id;
      }
      if (!missing.empty()) problems += " " + s.variant.str() + " lacks {" + missing + "};";
      if (!extra.empty()) problems += " " + s.variant.str() + " has extra {" + extra + "};";
    }
    if (!problems.empty()) {
      throw InputError("mismatched image ids for " + to_string(metric) + " (relative to " +
                       list.front().variant.str() + "):" + problems);
    }
    for (const auto& s : list) {
      if (out.means[s.variant].count(metric)) {
        throw InputError("duplicate series " + to_string(metric) + "/" + s.variant.str());
      }
      out.means[s.variant][metric] = mean_normalized(s);
    }
  }
  out.csv = "variant,metric,mean_normalized\n";
  for (const auto& [variant, per_metric] : out.means) {
    for (const auto& [metric, mean] : per_metric) {
      out.csv += variant.str() + "," + to_string(metric) + "," + format_exact(mean) + "\n";
    }
  }
  return out;
}

}  // namespace gevk
