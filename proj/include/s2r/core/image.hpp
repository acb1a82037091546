#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"

namespace s2r {

/// 8-bit raster, row-major, channel-interleaved. Channels is 1 (luminance)
/// or 3 (RGB).
class Image {
 public:
  Image() = default;

  Image(int width, int height, int channels, std::uint8_t fill = 0)
      : width_(width), height_(height), channels_(channels) {
    validate_shape();
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  Image(int width, int height, int channels, std::vector<std::uint8_t> data)
      : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    validate_shape();
    require(data_.size() == static_cast<std::size_t>(width) * height * channels,
            "image data length does not match width*height*channels");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  std::uint8_t& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<const std::uint8_t> row(int y) const {
    return std::span<const std::uint8_t>(data_).subspan(
        static_cast<std::size_t>(y) * width_ * channels_,
        static_cast<std::size_t>(width_) * channels_);
  }

  bool same_shape(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  void validate_shape() const {
    require(width_ > 0 && height_ > 0, "image dimensions must be positive");
    require(channels_ == 1 || channels_ == 3, "image must have 1 or 3 channels");
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Axis-aligned crop window; (x0, y0) is the inclusive top-left corner.
struct Roi {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  bool fits(const Image& img) const {
    return x0 >= 0 && y0 >= 0 && width > 0 && height > 0 &&
           x0 + width <= img.width() && y0 + height <= img.height();
  }

  static Roi full(const Image& img) { return {0, 0, img.width(), img.height()}; }

  friend bool operator==(const Roi&, const Roi&) = default;
};

inline std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

/// BT.601 luma, Y = round(0.299 R + 0.587 G + 0.114 B). Grayscale input is
/// returned unchanged.
inline Image to_luminance(const Image& img) {
  if (img.channels() == 1) return img;
  Image out(img.width(), img.height(), 1);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double y = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    dst[i] = clamp_u8(y);
  }
  return out;
}

inline Image crop(const Image& img, const Roi& roi) {
  if (!roi.fits(img)) {
    throw ValidationError("crop window (" + std::to_string(roi.x0) + "," + std::to_string(roi.y0) +
                          "," + std::to_string(roi.width) + "x" + std::to_string(roi.height) +
                          ") out of bounds for " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()) + " image");
  }
  Image out(roi.width, roi.height, img.channels());
  const std::size_t row_bytes = static_cast<std::size_t>(roi.width) * img.channels();
  for (int y = 0; y < roi.height; ++y) {
    auto src = img.row(roi.y0 + y).subspan(static_cast<std::size_t>(roi.x0) * img.channels(), row_bytes);
    std::copy(src.begin(), src.end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(y * row_bytes));
  }
  return out;
}

/// Plain float plane used by the metric modules.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double& operator()(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double operator()(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

inline Plane to_plane(const Image& img) {
  const Image lum = to_luminance(img);
  Plane p(lum.width(), lum.height());
  auto d = lum.data();
  std::copy(d.begin(), d.end(), p.values.begin());
  return p;
}

namespace detail {

inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

}  // namespace detail

/// Separable Gaussian blur with replicated borders; sigma <= 0 is identity.
/// Radius is ceil(3 sigma).
inline Image gaussian_blur(const Image& img, double sigma) {
  if (sigma <= 0.0) return img;
  const auto kd = detail::gaussian_kernel(sigma);
  const std::vector<float> k(kd.begin(), kd.end());
  const int r = static_cast<int>(k.size() / 2);
  const int w = img.width(), h = img.height(), ch = img.channels();
  const int stride = w * ch;
  // Horizontal pass into a float buffer, one padded row at a time.
  std::vector<float> tmp(img.size());
  std::vector<float> padded(static_cast<std::size_t>(w + 2 * r) * ch);
  auto src = img.data();
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = src.data() + static_cast<std::size_t>(y) * stride;
    for (int x = -r; x < w + r; ++x) {
      const int xx = std::clamp(x, 0, w - 1);
      for (int c = 0; c < ch; ++c) padded[static_cast<std::size_t>(x + r) * ch + c] = row[xx * ch + c];
    }
    float* out = tmp.data() + static_cast<std::size_t>(y) * stride;
    for (int i = 0; i < stride; ++i) {
      float acc = 0.0f;
      const float* base = padded.data() + i;
      for (int t = 0; t <= 2 * r; ++t) acc += k[t] * base[t * ch];
      out[i] = acc;
    }
  }
  // Vertical pass accumulates whole rows.
  Image out(w, h, ch);
  auto dst = out.data();
  std::vector<float> acc(stride);
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0f);
    for (int t = -r; t <= r; ++t) {
      const int yy = std::clamp(y + t, 0, h - 1);
      const float kt = k[t + r];
      const float* row = tmp.data() + static_cast<std::size_t>(yy) * stride;
      for (int i = 0; i < stride; ++i) acc[i] += kt * row[i];
    }
    std::uint8_t* o = dst.data() + static_cast<std::size_t>(y) * stride;
    for (int i = 0; i < stride; ++i) o[i] = clamp_u8(acc[i]);
  }
  return out;
}

}  // namespace s2r
