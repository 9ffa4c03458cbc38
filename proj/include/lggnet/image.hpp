#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "lggnet/tensor.hpp"

namespace lggnet {

/// 8-bit image as decoded from disk: row-major, interleaved channels, RGB
/// order for colour images.
struct RawImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;
};

/// Decodes PNG/JPEG/BMP. Throws DataError when the file cannot be decoded.
RawImage decode_image(const std::filesystem::path& path);

/// Encodes by extension (.png, .jpg, .bmp).
void write_image(const std::filesystem::path& path, const RawImage& image);

/// Luminance 0.299 R + 0.587 G + 0.114 B, bilinear resize to height x width,
/// scale to [0, 1]. With channels == 3 the colour planes are kept instead of
/// converted. Output is [height, width, channels].
Tensor<float> preprocess(const RawImage& image, std::size_t height = 256, std::size_t width = 256,
                         std::size_t channels = 1);

/// Bilinear resampling with pixel-centre alignment and clamped borders.
Tensor<float> resize_bilinear(const Tensor<float>& image, std::size_t height, std::size_t width);

// Geometric transforms on [H, W, C] images. Rotation and translation fill
// uncovered pixels with 0.
Tensor<float> flip_horizontal(const Tensor<float>& image);
Tensor<float> flip_vertical(const Tensor<float>& image);
Tensor<float> rotate(const Tensor<float>& image, double degrees);
Tensor<float> translate(const Tensor<float>& image, long dy, long dx);

}  // namespace lggnet
