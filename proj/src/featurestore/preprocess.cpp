#include "gevk/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "gevk/common.hpp"

namespace gevk {

namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

std::vector<Tap> taps(std::size_t in, std::size_t out) {
  std::vector<Tap> t(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double max_pos = static_cast<double>(in - 1);
  for (std::size_t i = 0; i < out; ++i) {
    double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, max_pos);
    const auto lo = static_cast<std::size_t>(std::floor(src));
    t[i] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
  }
  return t;
}

}  // namespace

std::vector<float> resize_normalize(std::span<const std::uint8_t> pixels, std::size_t width,
                                    std::size_t height, std::size_t out_width, std::size_t out_height) {
  if (pixels.empty()) throw InputError("empty pixel buffer");
  if (width == 0 || height == 0 || out_width == 0 || out_height == 0) {
    throw InputError("image dimensions must be at least 1");
  }
  if (pixels.size() / 3 / width != height || pixels.size() != width * height * 3) {
    throw InputError("pixel buffer of " + std::to_string(pixels.size()) + " bytes does not match " +
                     std::to_string(width) + "x" + std::to_string(height) + " RGB");
  }

  const auto xs = taps(width, out_width);
  const auto ys = taps(height, out_height);
  std::vector<float> out(out_width * out_height * 3);
  auto at = [&](std::size_t x, std::size_t y, std::size_t c) {
    return static_cast<double>(pixels[(y * width + x) * 3 + c]);
  };
  for (std::size_t oy = 0; oy < out_height; ++oy) {
    const auto& ty = ys[oy];
    for (std::size_t ox = 0; ox < out_width; ++ox) {
      const auto& tx = xs[ox];
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = at(tx.lo, ty.lo, c) * (1.0 - tx.frac) + at(tx.hi, ty.lo, c) * tx.frac;
        const double bottom = at(tx.lo, ty.hi, c) * (1.0 - tx.frac) + at(tx.hi, ty.hi, c) * tx.frac;
        const double v = (top * (1.0 - ty.frac) + bottom * ty.frac) / 255.0;
        out[(oy * out_width + ox) * 3 + c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return out;
}

bool PpmDecoder::accepts(std::span<const std::uint8_t> file) const {
  return file.size() >= 2 && file[0] == 'P' && file[1] == '6';
}

DecodedImage PpmDecoder::decode(std::span<const std::uint8_t> file) const {
  if (!accepts(file)) throw InputError("not a binary PPM file");
  std::size_t pos = 2;
  auto next_number = [&]() -> std::size_t {
    while (pos < file.size()) {
      if (file[pos] == '#') {
        while (pos < file.size() && file[pos] != '\n') ++pos;
      } else if (std::isspace(file[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= file.size() || !std::isdigit(file[pos])) throw InputError("malformed PPM header");
    std::size_t v = 0;
    while (pos < file.size() && std::isdigit(file[pos])) {
      v = v * 10 + (file[pos++] - '0');
      if (v > (1u << 28)) throw InputError("PPM header value out of range");
    }
    return v;
  };
  DecodedImage img;
  img.width = next_number();
  img.height = next_number();
  const std::size_t maxval = next_number();
  if (img.width == 0 || img.height == 0 || maxval == 0 || maxval > 255) {
    throw InputError("unsupported PPM dimensions or maxval");
  }
  ++pos;  // single whitespace byte before raster
  const std::size_t bytes = img.width * img.height * 3;
  if (pos > file.size() || file.size() - pos < bytes) throw InputError("PPM raster is truncated");
  img.pixels.assign(file.begin() + static_cast<std::ptrdiff_t>(pos),
                    file.begin() + static_cast<std::ptrdiff_t>(pos + bytes));
  if (maxval != 255) {
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(std::lround(p * 255.0 / static_cast<double>(maxval)));
  }
  return img;
}

}  // namespace gevk
