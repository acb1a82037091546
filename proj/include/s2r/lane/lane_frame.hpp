#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"

namespace s2r::lane {

inline constexpr int kAbsent = -2;
inline constexpr int kMaxLines = 4;

/// Lane points at fixed sample rows. lanes[k] holds line id k+1; kAbsent
/// marks rows where that line has no point.
struct LaneFrame {
  std::string frame_id;
  std::vector<int> h_samples;
  std::vector<std::vector<int>> lanes;

  void validate(int width = -1) const {
    for (std::size_t i = 1; i < h_samples.size(); ++i) {
      require(h_samples[i] > h_samples[i - 1], "h_samples must be strictly increasing in frame " + frame_id);
    }
    require(lanes.size() <= static_cast<std::size_t>(kMaxLines), "at most 4 lanes per frame");
    for (const auto& l : lanes) {
      require(l.size() == h_samples.size(), "lane length differs from h_samples in frame " + frame_id);
      for (int x : l) {
        require(x == kAbsent || (x >= 0 && (width < 0 || x < width)), "lane x out of range in frame " + frame_id);
      }
    }
  }

  friend bool operator==(const LaneFrame&, const LaneFrame&) = default;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Segmentation image whose lane pixels carry exactly `lane_color`.
struct SegmentationRaster {
  Image image;
  Rgb lane_color{255, 255, 255};
};

/// Rows start..stop inclusive, every `step` rows.
inline std::vector<int> make_h_samples(int start, int stop, int step) {
  require(step > 0 && start <= stop && start >= 0, "invalid h_samples range");
  std::vector<int> out;
  for (int r = start; r <= stop; r += step) out.push_back(r);
  return out;
}

/// 250..610 step 10, for 808x620 frames.
inline std::vector<int> default_h_samples() { return make_h_samples(250, 610, 10); }

}  // namespace s2r::lane
