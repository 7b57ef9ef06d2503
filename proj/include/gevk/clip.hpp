#pragma once

#include <span>

namespace gevk {

inline constexpr double kClipWeight = 100.0;

/// dot(u, v) / (|u| |v|). Throws std::invalid_argument on size mismatch or a zero vector.
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const float> u, std::span<const float> v);

/// CLIPScore: weight * max(cosine(image, text), 0).
double clip_score(std::span<const double> image, std::span<const double> text, double weight = kClipWeight);
double clip_score(std::span<const float> image, std::span<const float> text, double weight = kClipWeight);

}  // namespace gevk
