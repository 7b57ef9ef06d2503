#include "gevk/clip.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gevk {

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
  if (u.empty()) throw std::invalid_argument("cosine: empty vectors");
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) throw std::invalid_argument("cosine: zero-norm vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }
double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }

double clip_score(std::span<const double> image, std::span<const double> text, double weight) {
  return weight * std::max(cosine(image, text), 0.0);
}

double clip_score(std::span<const float> image, std::span<const float> text, double weight) {
  return weight * std::max(cosine(image, text), 0.0);
}

}  // namespace gevk
