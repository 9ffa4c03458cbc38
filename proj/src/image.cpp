#include "lggnet/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <opencv2/imgcodecs.hpp>

namespace lggnet {

RawImage decode_image(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw DataError("cannot decode image " + path.string());
  if (mat.depth() != CV_8U) {
    mat.convertTo(mat, CV_8U, mat.depth() == CV_16U ? 1.0 / 257.0 : 1.0);
  }
  RawImage image;
  image.width = static_cast<std::size_t>(mat.cols);
  image.height = static_cast<std::size_t>(mat.rows);
  const int source_channels = mat.channels();
  // Alpha is dropped; OpenCV stores colour as BGR.
  image.channels = source_channels >= 3 ? 3 : 1;
  image.pixels.resize(image.width * image.height * image.channels);
  for (int y = 0; y < mat.rows; ++y) {
    const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) {
      const std::uint8_t* px = row + static_cast<std::ptrdiff_t>(x) * source_channels;
      std::uint8_t* out = &image.pixels[(static_cast<std::size_t>(y) * image.width + static_cast<std::size_t>(x)) *
                                        image.channels];
      if (image.channels == 3) {
        out[0] = px[2];
        out[1] = px[1];
        out[2] = px[0];
      } else {
        out[0] = px[0];
      }
    }
  }
  return image;
}

void write_image(const std::filesystem::path& path, const RawImage& image) {
  if (image.channels != 1 && image.channels != 3) throw DataError("write_image: only 1 or 3 channels");
  cv::Mat mat(static_cast<int>(image.height), static_cast<int>(image.width),
              image.channels == 3 ? CV_8UC3 : CV_8UC1);
  for (std::size_t y = 0; y < image.height; ++y) {
    std::uint8_t* row = mat.ptr<std::uint8_t>(static_cast<int>(y));
    for (std::size_t x = 0; x < image.width; ++x) {
      const std::uint8_t* px = &image.pixels[(y * image.width + x) * image.channels];
      if (image.channels == 3) {
        row[x * 3 + 0] = px[2];
        row[x * 3 + 1] = px[1];
        row[x * 3 + 2] = px[0];
      } else {
        row[x] = px[0];
      }
    }
  }
  if (!cv::imwrite(path.string(), mat)) throw DataError("cannot write image " + path.string());
}

Tensor<float> resize_bilinear(const Tensor<float>& image, std::size_t height, std::size_t width) {
  if (image.rank() != 3) throw ShapeError("resize_bilinear expects an H x W x C image");
  if (height == 0 || width == 0) throw ShapeError("resize_bilinear: zero target extent");
  const std::size_t in_h = image.extent(0), in_w = image.extent(1), channels = image.extent(2);
  const double scale_y = static_cast<double>(in_h) / static_cast<double>(height);
  const double scale_x = static_cast<double>(in_w) / static_cast<double>(width);

  auto source_coord = [](std::size_t dst, double scale, std::size_t extent, std::size_t& lo, std::size_t& hi,
                         double& frac) {
    double src = (static_cast<double>(dst) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(extent - 1));
    lo = static_cast<std::size_t>(std::floor(src));
    hi = std::min(lo + 1, extent - 1);
    frac = src - static_cast<double>(lo);
  };

  Tensor<float> out({height, width, channels});
  for (std::size_t y = 0; y < height; ++y) {
    std::size_t y0, y1;
    double fy;
    source_coord(y, scale_y, in_h, y0, y1, fy);
    for (std::size_t x = 0; x < width; ++x) {
      std::size_t x0, x1;
      double fx;
      source_coord(x, scale_x, in_w, x0, x1, fx);
      for (std::size_t c = 0; c < channels; ++c) {
        const double top = (1.0 - fx) * image.at(y0, x0, c) + fx * image.at(y0, x1, c);
        const double bottom = (1.0 - fx) * image.at(y1, x0, c) + fx * image.at(y1, x1, c);
        out.at(y, x, c) = static_cast<float>((1.0 - fy) * top + fy * bottom);
      }
    }
  }
  return out;
}

Tensor<float> preprocess(const RawImage& image, std::size_t height, std::size_t width, std::size_t channels) {
  if (image.width == 0 || image.height == 0) throw DataError("preprocess: image has a zero dimension");
  if (channels != 1 && channels != 3) throw ConfigError("preprocess: channels must be 1 or 3");
  if (image.pixels.size() != image.width * image.height * image.channels) {
    throw DataError("preprocess: pixel buffer does not match image dimensions");
  }

  Tensor<float> source({image.height, image.width, channels});
  const std::size_t pixels = image.width * image.height;
  for (std::size_t i = 0; i < pixels; ++i) {
    const std::uint8_t* px = &image.pixels[i * image.channels];
    if (channels == 1) {
      const double luminance =
          image.channels >= 3 ? 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2] : static_cast<double>(px[0]);
      source[i] = static_cast<float>(luminance);
    } else {
      for (std::size_t c = 0; c < 3; ++c) source[i * 3 + c] = px[image.channels >= 3 ? c : 0];
    }
  }

  Tensor<float> out = (image.height == height && image.width == width) ? std::move(source)
                                                                        : resize_bilinear(source, height, width);
  for (float& v : out.values()) v = std::clamp(v / 255.0f, 0.0f, 1.0f);
  return out;
}

Tensor<float> flip_horizontal(const Tensor<float>& image) {
  const std::size_t h = image.extent(0), w = image.extent(1), c = image.extent(2);
  Tensor<float> out(image.shape());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t k = 0; k < c; ++k) out.at(y, x, k) = image.at(y, w - 1 - x, k);
  return out;
}

Tensor<float> flip_vertical(const Tensor<float>& image) {
  const std::size_t h = image.extent(0), w = image.extent(1), c = image.extent(2);
  Tensor<float> out(image.shape());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t k = 0; k < c; ++k) out.at(y, x, k) = image.at(h - 1 - y, x, k);
  return out;
}

Tensor<float> rotate(const Tensor<float>& image, double degrees) {
  const std::size_t h = image.extent(0), w = image.extent(1), c = image.extent(2);
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double cy = (static_cast<double>(h) - 1.0) / 2.0, cx = (static_cast<double>(w) - 1.0) / 2.0;

  // Samples outside the source read as zero.
  auto sample = [&](long y, long x, std::size_t k) -> double {
    if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) return 0.0;
    return image.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), k);
  };

  Tensor<float> out(image.shape());
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      // Inverse mapping: rotate the destination point back into the source.
      const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
      const double sy = cos_t * dy - sin_t * dx + cy;
      const double sx = sin_t * dy + cos_t * dx + cx;
      const double fy0 = std::floor(sy), fx0 = std::floor(sx);
      const double fy = sy - fy0, fx = sx - fx0;
      const long y0 = static_cast<long>(fy0), x0 = static_cast<long>(fx0);
      for (std::size_t k = 0; k < c; ++k) {
        const double top = (1.0 - fx) * sample(y0, x0, k) + fx * sample(y0, x0 + 1, k);
        const double bottom = (1.0 - fx) * sample(y0 + 1, x0, k) + fx * sample(y0 + 1, x0 + 1, k);
        out.at(y, x, k) = static_cast<float>((1.0 - fy) * top + fy * bottom);
      }
    }
  }
  return out;
}

Tensor<float> translate(const Tensor<float>& image, long dy, long dx) {
  const long h = static_cast<long>(image.extent(0)), w = static_cast<long>(image.extent(1));
  const std::size_t c = image.extent(2);
  Tensor<float> out(image.shape());
  for (long y = 0; y < h; ++y) {
    const long sy = y - dy;
    if (sy < 0 || sy >= h) continue;
    for (long x = 0; x < w; ++x) {
      const long sx = x - dx;
      if (sx < 0 || sx >= w) continue;
      for (std::size_t k = 0; k < c; ++k) {
        out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), k) =
            image.at(static_cast<std::size_t>(sy), static_cast<std::size_t>(sx), k);
      }
    }
  }
  return out;
}

}  // namespace lggnet
