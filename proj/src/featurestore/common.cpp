#include "gevk/common.hpp"

namespace gevk {

ModelVariantId ModelVariantId::parse(std::string_view text) {
  if (text.size() == 2 && (text[0] == 'M' || text[0] == 'm') && text[1] >= '0' && text[1] <= '4') {
    return ModelVariantId(static_cast<VariantLabel>(text[1] - '0'));
  }
  throw InputError("unknown model variant '" + std::string(text) + "' (expected M0..M4)");
}

std::string ModelVariantId::str() const {
  return "M" + std::to_string(static_cast<int>(label_));
}

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::clip: return "clip";
    case Metric::giqa_gmm: return "giqa_gmm";
    case Metric::giqa_knn: return "giqa_knn";
  }
  return "unknown";
}

std::string to_string(Orientation orientation) {
  return orientation == Orientation::higher_better ? "higher_better" : "lower_cost";
}

Metric parse_metric(std::string_view text) {
  if (text == "clip") return Metric::clip;
  if (text == "giqa_gmm" || text == "gmm") return Metric::giqa_gmm;
  if (text == "giqa_knn" || text == "knn") return Metric::giqa_knn;
  throw InputError("unknown metric '" + std::string(text) + "'");
}

Orientation parse_orientation(std::string_view text) {
  if (text == "higher_better") return Orientation::higher_better;
  if (text == "lower_cost") return Orientation::lower_cost;
  throw InputError("unknown orientation '" + std::string(text) + "'");
}

Orientation series_orientation(Metric metric) {
  return metric == Metric::giqa_knn ? Orientation::lower_cost : Orientation::higher_better;
}

Orientation report_orientation(Metric metric) {
  return metric == Metric::clip ? Orientation::higher_better : Orientation::lower_cost;
}

}  // namespace gevk
