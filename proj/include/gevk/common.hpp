#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gevk {

/// Raised for bad user input (files, configs, arguments). The CLI maps it to exit status 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VariantLabel { M0, M1, M2, M3, M4 };

/// One of the compared model variants. M0 is the unmodified-input baseline.
class ModelVariantId {
 public:
  constexpr ModelVariantId() = default;
  constexpr explicit ModelVariantId(VariantLabel label) : label_(label) {}

  static ModelVariantId parse(std::string_view text);

  constexpr VariantLabel label() const { return label_; }
  constexpr bool is_baseline() const { return label_ == VariantLabel::M0; }
  std::string str() const;

  friend constexpr auto operator<=>(const ModelVariantId&, const ModelVariantId&) = default;

 private:
  VariantLabel label_ = VariantLabel::M0;
};

enum class Metric { clip, giqa_gmm, giqa_knn };

/// higher_better: larger raw values are better. lower_cost: smaller magnitudes are better.
enum class Orientation { higher_better, lower_cost };

std::string to_string(Metric metric);
std::string to_string(Orientation orientation);
Metric parse_metric(std::string_view text);
Orientation parse_orientation(std::string_view text);

/// Orientation of per-image raw scores (GMM log-likelihood: larger is better).
Orientation series_orientation(Metric metric);

/// Orientation used by model-comparison arithmetic (GMM compared on log-likelihood magnitude).
Orientation report_orientation(Metric metric);

}  // namespace gevk
