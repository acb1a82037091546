#pragma once

#include <cmath>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/lane/lane_frame.hpp"

namespace s2r::lane {

/// Centers of contiguous runs of lane-colored pixels in one row, left to
/// right. A run center is round(mean column index).
inline std::vector<int> row_runs(const SegmentationRaster& raster, int row) {
  const Image& img = raster.image;
  require(row >= 0 && row < img.height(), "row out of range");
  require(img.channels() == 3, "segmentation raster must be RGB");
  std::vector<int> centers;
  int start = -1;
  const auto px = img.row(row);
  for (int x = 0; x <= img.width(); ++x) {
    const bool lane = x < img.width() && px[3 * x] == raster.lane_color.r &&
                      px[3 * x + 1] == raster.lane_color.g && px[3 * x + 2] == raster.lane_color.b;
    if (lane && start < 0) start = x;
    if (!lane && start >= 0) {
      // Mean of start..x-1 is (start + x - 1) / 2; halves round up.
      centers.push_back(static_cast<int>(std::lround((start + x - 1) / 2.0)));
      start = -1;
    }
  }
  return centers;
}

/// How a 3-point row is labeled. Pseudocode: second point left of the image
/// middle means lines 1,2,3. Prose: the opposite assignment.
enum class ThreeRunRule { kPseudocode, kProse };

struct ExtractionStats {
  int rows_two = 0;
  int rows_three = 0;
  int rows_four = 0;
  int rows_invalid = 0;
};

/// Labels per-row run centers with line ids 1..4. 2 runs -> lines 2,3;
/// 3 runs -> 1,2,3 or 2,3,4 depending on the second run; 4 runs -> 1..4;
/// anything else leaves the row empty.
inline LaneFrame extract_ground_truth(const SegmentationRaster& raster, const std::vector<int>& h_samples,
                                      ThreeRunRule rule = ThreeRunRule::kPseudocode,
                                      ExtractionStats* stats = nullptr) {
  LaneFrame f;
  f.h_samples = h_samples;
  f.lanes.assign(kMaxLines, std::vector<int>(h_samples.size(), kAbsent));
  const int w = raster.image.width();
  for (std::size_t i = 0; i < h_samples.size(); ++i) {
    const int row = h_samples[i];
    if (row < 0 || row >= raster.image.height()) continue;
    const auto runs = row_runs(raster, row);
    int first_line = 0;  // 0-based id of the leftmost run
    switch (runs.size()) {
      case 2:
        first_line = 1;
        if (stats) ++stats->rows_two;
        break;
      case 3: {
        const bool second_left = 2 * runs[1] < w;
        const bool lines_123 = rule == ThreeRunRule::kPseudocode ? second_left : !second_left;
        first_line = lines_123 ? 0 : 1;
        if (stats) ++stats->rows_three;
        break;
      }
      case 4:
        first_line = 0;
        if (stats) ++stats->rows_four;
        break;
      default:
        if (stats) ++stats->rows_invalid;
        continue;
    }
    for (std::size_t k = 0; k < runs.size(); ++k) f.lanes[first_line + k][i] = runs[k];
  }
  return f;
}

}  // namespace s2r::lane
