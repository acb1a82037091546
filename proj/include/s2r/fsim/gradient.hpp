#pragma once

#include <algorithm>
#include <cmath>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"

namespace s2r::fsim {

/// Scharr gradient magnitude, kernels [3 0 -3; 10 0 -10; 3 0 -3] / 16 and its
/// transpose, replicated borders.
inline Plane gradient_magnitude(const Plane& im) {
  require(im.width >= 3 && im.height >= 3, "gradient_magnitude needs at least 3x3 pixels");
  const int w = im.width, h = im.height;
  Plane out(w, h);
  auto px = [&](int x, int y) { return im(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (3.0 * (px(x + 1, y - 1) - px(x - 1, y - 1)) + 10.0 * (px(x + 1, y) - px(x - 1, y)) +
                         3.0 * (px(x + 1, y + 1) - px(x - 1, y + 1))) / 16.0;
      const double gy = (3.0 * (px(x - 1, y + 1) - px(x - 1, y - 1)) + 10.0 * (px(x, y + 1) - px(x, y - 1)) +
                         3.0 * (px(x + 1, y + 1) - px(x + 1, y - 1))) / 16.0;
      out(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

inline Plane gradient_magnitude(const Image& img) {
  require(img.channels() == 1, "gradient_magnitude expects a 1-channel image");
  return gradient_magnitude(to_plane(img));
}

}  // namespace s2r::fsim
