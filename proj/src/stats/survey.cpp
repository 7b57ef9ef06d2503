#include "gevk/survey.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gevk/common.hpp"
#include "gevk/csv.hpp"

namespace gevk {

void PairOutcome::validate() const {
  if (trials == 0) throw std::invalid_argument("pair " + pair_id + ": no trials");
  if (successes > trials) throw std::invalid_argument("pair " + pair_id + ": successes exceed trials");
}

double PairOutcome::proportion() const {
  validate();
  return static_cast<double>(successes) / static_cast<double>(trials);
}

namespace {

double round_places(double v, int places) {
  const double s = std::pow(10.0, places);
  return std::round(v * s) / s;
}

std::string fixed(double v, int places) {
  double r = round_places(v, places);
  if (r == 0.0) r = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, r);
  return buf;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<unsigned long long> as_number(const std::string& s) {
  unsigned long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

bool pair_id_less(const std::string& a, const std::string& b) {
  const auto na = as_number(a);
  const auto nb = as_number(b);
  if (na && nb) return *na != *nb ? *na < *nb : a < b;
  if (na != nb) return static_cast<bool>(na);  // numeric ids first
  return a < b;
}

// Empty -> nullopt; otherwise an integer in [1, 7] or an error message.
struct LikertCell {
  std::optional<int> value;
  std::string error;
};

LikertCell parse_likert(const std::string& text, const char* column) {
  if (text.empty()) return {};
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return {std::nullopt, std::string(column) + " '" + text + "' is not an integer"};
  }
  if (v < 1 || v > 7) return {std::nullopt, std::string(column) + " " + text + " outside 1-7"};
  return {v, {}};
}

const char* const kColumns[] = {"respondent_id", "pair_id", "choice", "confidence", "helpfulness", "role"};

}  // namespace

PreferenceSummary aggregate_preferences(const std::vector<PairOutcome>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("no image pairs");
  PreferenceSummary s;
  s.pairs = pairs;
  s.overall.pair_id = "overall";
  for (const auto& p : pairs) {
    p.validate();
    s.overall.successes += p.successes;
    s.overall.trials += p.trials;
    s.pair_percent.push_back(round_places(100.0 * p.proportion(), 0));
  }
  s.overall_percent = round_places(100.0 * s.overall.proportion(), 1);
  return s;
}

SurveyData parse_survey_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::vector<std::string>> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    header = csv::split(line);
    break;
  }
  if (!header) throw InputError("survey csv is empty");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->size(); ++i) col[lower(trim((*header)[i]))] = i;
  std::string missing;
  for (const char* name : kColumns) {
    if (!col.count(name)) missing += (missing.empty() ? "" : ", ") + std::string(name);
  }
  if (!missing.empty()) throw InputError("survey csv header (line " + std::to_string(line_no) + ") lacks: " + missing);

  SurveyData data;
  std::map<std::string, PairOutcome, decltype(&pair_id_less)> tallies(&pair_id_less);
  std::set<std::pair<std::string, std::string>> seen;
  std::map<std::string, int> helpfulness_by_respondent;
  std::vector<std::string> respondent_order;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto prefix = "line " + std::to_string(line_no) + ": ";
    const auto fields = csv::split(line);
    if (!fields) {
      data.diagnostics.push_back(prefix + "unterminated quote");
      continue;
    }
    if (fields->size() != header->size()) {
      data.diagnostics.push_back(prefix + "expected " + std::to_string(header->size()) + " fields, found " +
                                 std::to_string(fields->size()));
      continue;
    }
    auto field = [&](const char* name) { return trim((*fields)[col.at(name)]); };
    const auto respondent = field("respondent_id");
    const auto pair = field("pair_id");
    const auto choice = lower(field("choice"));
    if (respondent.empty() || pair.empty()) {
      data.diagnostics.push_back(prefix + "empty respondent_id or pair_id");
      continue;
    }
    if (choice != "optimized" && choice != "original") {
      data.diagnostics.push_back(prefix + "choice '" + choice + "' is neither optimized nor original");
      continue;
    }
    const auto confidence = parse_likert(field("confidence"), "confidence");
    const auto helpfulness = parse_likert(field("helpfulness"), "helpfulness");
    if (!confidence.error.empty() || !helpfulness.error.empty()) {
      data.diagnostics.push_back(prefix + (confidence.error.empty() ? helpfulness.error : confidence.error));
      continue;
    }
    if (!seen.insert({respondent, pair}).second) {
      data.diagnostics.push_back(prefix + "duplicate answer from " + respondent + " for pair " + pair);
      continue;
    }

    auto& t = tallies[pair];
    t.pair_id = pair;
    ++t.trials;
    if (choice == "optimized") ++t.successes;
    if (confidence.value) data.confidence.push_back(*confidence.value);
    if (helpfulness.value) {
      const auto [it, inserted] = helpfulness_by_respondent.emplace(respondent, *helpfulness.value);
      if (inserted) {
        respondent_order.push_back(respondent);
      } else if (it->second != *helpfulness.value) {
        data.diagnostics.push_back(prefix + "helpfulness for " + respondent + " differs from an earlier row; kept " +
                                   std::to_string(it->second));
      }
    }
    ++data.rows_used;
  }

  for (auto& [id, t] : tallies) data.pairs.push_back(t);
  for (const auto& r : respondent_order) data.helpfulness.push_back(helpfulness_by_respondent.at(r));
  return data;
}

SurveyData load_survey_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_survey_csv(ss.str());
}

SurveyReport build_survey_report(const std::vector<PairOutcome>& pairs, const std::optional<LikertSummary>& confidence,
                                 const std::optional<LikertSummary>& helpfulness) {
  const auto agg = aggregate_preferences(pairs);
  SurveyReport report;
  for (std::size_t i = 0; i < agg.pairs.size(); ++i) {
    const auto& p = agg.pairs[i];
    report.pairs.push_back({p, agg.pair_percent[i], binom_test_one_sided(p.successes, p.trials)});
  }
  const auto& o = agg.overall;
  report.overall = {o, agg.overall_percent, binom_test_one_sided(o.successes, o.trials)};
  report.overall_lower_one_sided = clopper_pearson(o.successes, o.trials, 0.05, IntervalSide::lower_one_sided);
  report.overall_normal_lower = normal_approx_lower(o.successes, o.trials);
  report.overall_wilson = wilson_interval(o.successes, o.trials);
  if (confidence) {
    report.confidence = confidence;
    report.confidence_test = one_sample_t(*confidence, confidence->midpoint());
  }
  if (helpfulness) {
    report.helpfulness = helpfulness;
    report.helpfulness_test = one_sample_t(*helpfulness, helpfulness->midpoint());
  }
  return report;
}

SurveyReport build_survey_report(const SurveyData& data) {
  if (data.pairs.empty()) throw InputError("survey has no valid rows");
  std::vector<std::string> notes = data.diagnostics;
  auto summarize = [&](const std::vector<int>& values, const char* name) -> std::optional<LikertSummary> {
    if (values.size() < 2) return std::nullopt;
    auto s = LikertSummary::from_samples(values);
    if (s.sd == 0.0) {
      notes.push_back(std::string(name) + ": all responses equal, t-test skipped");
      return std::nullopt;
    }
    return s;
  };
  const auto confidence = summarize(data.confidence, "confidence");
  const auto helpfulness = summarize(data.helpfulness, "helpfulness");
  auto report = build_survey_report(data.pairs, confidence, helpfulness);
  report.diagnostics = std::move(notes);
  return report;
}

std::string format_p_value(double p, double floor) {
  auto strip_zero = [](std::string s) {
    if (s.rfind("0.", 0) == 0) s.erase(0, 1);
    return s;
  };
  if (p < floor) {
    int places = 0;
    for (double f = floor; f < 1.0 - 1e-12 && places < 12; f *= 10.0) ++places;
    return "< " + strip_zero(fixed(floor, places));
  }
  if (p >= 1.0) return "1.000";
  return strip_zero(fixed(p, 3));
}

std::string format_percent_interval(std::pair<double, double> ci) {
  auto cell = [](double v) {
    if (v == 0.0) return std::string("0");
    if (v == 1.0) return std::string("100");
    return fixed(100.0 * v, 1);
  };
  return "[" + cell(ci.first) + ", " + cell(ci.second) + "]";
}

namespace {

std::string percent_cell(double percent, int places) {
  return fixed(percent, places) + "%";
}

std::string likert_line(const char* label, const LikertSummary& s, const TestResult& t) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: M = %.2f, SD = %.2f, n = %zu; t(%.0f) = %.2f, p %s (vs. midpoint %.1f)", label,
                s.mean, s.sd, s.n, *t.df, t.statistic,
                t.p_value < 0.001 ? "< .001" : ("= " + format_p_value(t.p_value)).c_str(), s.midpoint());
  return buf;
}

nlohmann::json interval_json(std::pair<double, double> ci) { return nlohmann::json::array({ci.first, ci.second}); }

nlohmann::json row_json(const SurveyRow& r) {
  return {{"pair_id", r.outcome.pair_id},
          {"successes", r.outcome.successes},
          {"trials", r.outcome.trials},
          {"percent", r.percent},
          {"p_value", r.binomial.p_value},
          {"ci_two_sided", interval_json(r.binomial.ci)}};
}

nlohmann::json likert_json(const LikertSummary& s, const TestResult& t) {
  return {{"mean", s.mean}, {"sd", s.sd},       {"n", s.n},           {"mu0", s.midpoint()},
          {"t", t.statistic}, {"df", *t.df},     {"p_value", t.p_value}, {"ci_mean", interval_json(t.ci)}};
}

}  // namespace

std::string emit_survey_markdown(const SurveyReport& report) {
  std::string out =
      "| Image Pair | Percent Choosing Optimized | Successes | p-value | 95% CI |\n"
      "|---|---:|---:|---:|---|\n";
  for (const auto& r : report.pairs) {
    out += "| Pair " + r.outcome.pair_id + " | " + percent_cell(r.percent, 0) + " | " +
           std::to_string(r.outcome.successes) + "/" + std::to_string(r.outcome.trials) + " | " +
           format_p_value(r.binomial.p_value) + " | " + format_percent_interval(r.binomial.ci) + " |\n";
  }
  const auto& o = report.overall;
  out += "| Overall | " + percent_cell(o.percent, 1) + " | " + std::to_string(o.outcome.successes) + "/" +
         std::to_string(o.outcome.trials) + " | " + format_p_value(o.binomial.p_value) + " | " +
         format_percent_interval(o.binomial.ci) + " |\n";

  out += "\nIntervals are two-sided 95% Clopper-Pearson; p-values are one-sided exact binomial tests against 0.5.\n";
  out += "\nOverall 95% interval by method:\n\n";
  out += "- Clopper-Pearson, two-sided: " + format_percent_interval(o.binomial.ci) + "\n";
  out += "- Clopper-Pearson, one-sided lower bound: " + format_percent_interval(report.overall_lower_one_sided) + "\n";
  out += "- Normal approximation, lower bound: " + format_percent_interval(report.overall_normal_lower) + "\n";
  out += "- Wilson score, two-sided: " + format_percent_interval(report.overall_wilson) + "\n";
  const double lows[] = {o.binomial.ci.first, report.overall_lower_one_sided.first, report.overall_normal_lower.first,
                         report.overall_wilson.first};
  const auto [lo_min, lo_max] = std::minmax_element(std::begin(lows), std::end(lows));
  out += "\nLower bounds differ by " + fixed(100.0 * (*lo_max - *lo_min), 1) +
         " percentage points across methods; name the method when quoting the overall interval.\n";

  if (report.confidence || report.helpfulness) out += "\n";
  if (report.confidence) out += likert_line("Confidence", *report.confidence, *report.confidence_test) + "\n";
  if (report.helpfulness) out += likert_line("Helpfulness", *report.helpfulness, *report.helpfulness_test) + "\n";
  if (!report.diagnostics.empty()) {
    out += "\nDiagnostics:\n\n";
    for (const auto& d : report.diagnostics) out += "- " + d + "\n";
  }
  return out;
}

std::string emit_survey_json(const SurveyReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& r : report.pairs) pairs.push_back(row_json(r));
  auto overall = row_json(report.overall);
  overall["ci_lower_one_sided"] = interval_json(report.overall_lower_one_sided);
  overall["ci_normal_lower"] = interval_json(report.overall_normal_lower);
  overall["ci_wilson"] = interval_json(report.overall_wilson);
  nlohmann::json j{{"pairs", pairs}, {"overall", overall}, {"diagnostics", report.diagnostics}};
  if (report.confidence) j["confidence"] = likert_json(*report.confidence, *report.confidence_test);
  if (report.helpfulness) j["helpfulness"] = likert_json(*report.helpfulness, *report.helpfulness_test);
  return j.dump(2) + "\n";
}

}  // namespace gevk
