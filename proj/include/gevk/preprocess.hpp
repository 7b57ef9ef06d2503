#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gevk {

inline constexpr std::size_t kModelSide = 512;

/// Interleaved 8-bit RGB pixels, row-major.
struct DecodedImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Decoding of compressed files (JPEG, PNG, ...) sits behind this boundary;
/// everything downstream works on DecodedImage.
class ImageDecoder {
 public:
  virtual ~ImageDecoder() = default;
  virtual bool accepts(std::span<const std::uint8_t> file) const = 0;
  virtual DecodedImage decode(std::span<const std::uint8_t> file) const = 0;
};

/// Binary PPM (P6, maxval <= 255).
class PpmDecoder final : public ImageDecoder {
 public:
  bool accepts(std::span<const std::uint8_t> file) const override;
  DecodedImage decode(std::span<const std::uint8_t> file) const override;
};

/// Bilinear resample to `out_width` x `out_height` (half-pixel centers, edge clamp),
/// then divide every channel by 255. Output is interleaved RGB in [0, 1].
std::vector<float> resize_normalize(std::span<const std::uint8_t> pixels, std::size_t width,
                                    std::size_t height, std::size_t out_width = kModelSide,
                                    std::size_t out_height = kModelSide);

}  // namespace gevk
