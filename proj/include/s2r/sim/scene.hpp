#pragma once

#include <cmath>
#include <string>

#include "s2r/core/error.hpp"

namespace s2r::sim {

/// Road and lane-marking geometry.
struct SceneSpec {
  double road_width = 3.5;   // lane width, m
  double line_length = 4.5;  // dash length, m
  double line_spacing = 4.0; // gap between dashes, m
  double line_width = 0.125; // marking width, m
  int lane_count = 3;
  double texture_sharpness = 1.0;  // 1 = crisp paint, 0 = invisible
  bool connected_lines = false;    // solid instead of dashed separators

  void validate() const {
    require(road_width > 0 && line_length > 0 && line_spacing > 0 && line_width > 0,
            "scene lengths must be positive");
    require(lane_count >= 2, "scene needs at least 2 lanes");
    require(texture_sharpness >= 0.0 && texture_sharpness <= 1.0, "texture_sharpness must be in [0, 1]");
  }

  /// The ego vehicle drives the second lane from the left. Line k (0-based,
  /// left to right) sits at this lateral offset from the ego-lane center.
  double line_offset(int k) const { return road_width * (1.5 - k); }
  int line_count() const { return lane_count + 1; }
  bool line_dashed(int k) const { return !connected_lines && k > 0 && k < lane_count; }
  double road_left_edge() const { return line_offset(0) + 0.5; }
  double road_right_edge() const { return line_offset(lane_count) - 0.5; }
};

}  // namespace s2r::sim
