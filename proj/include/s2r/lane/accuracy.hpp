#pragma once

#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/lane/lane_frame.hpp"

namespace s2r::lane {

inline constexpr double kDefaultThresholdPx = 20.0;

struct AccuracyReport {
  double accuracy = 0.0;
  long matched = 0;
  long total_gt = 0;
  double threshold = kDefaultThresholdPx;
};

/// Fraction of ground-truth points whose same-id, same-row prediction lies
/// within `threshold` pixels. Frames pair up by frame_id.
inline AccuracyReport tusimple_accuracy(const std::vector<LaneFrame>& preds, const std::vector<LaneFrame>& gts,
                                        double threshold = kDefaultThresholdPx) {
  std::map<std::string, const LaneFrame*> by_id;
  for (const auto& p : preds) {
    require(by_id.emplace(p.frame_id, &p).second, "duplicate prediction frame_id: " + p.frame_id);
  }
  AccuracyReport r;
  r.threshold = threshold;
  for (const auto& gt : gts) {
    const auto it = by_id.find(gt.frame_id);
    if (it == by_id.end()) throw ValidationError("unmatched frame_id: " + gt.frame_id);
    const LaneFrame& pred = *it->second;
    if (pred.h_samples != gt.h_samples) throw ValidationError("h_samples mismatch for frame " + gt.frame_id);
    for (std::size_t line = 0; line < gt.lanes.size(); ++line) {
      for (std::size_t i = 0; i < gt.h_samples.size(); ++i) {
        const int x_gt = gt.lanes[line][i];
        if (x_gt == kAbsent) continue;
        ++r.total_gt;
        if (line >= pred.lanes.size()) continue;
        const int x_pred = pred.lanes[line][i];
        if (x_pred != kAbsent && std::abs(x_pred - x_gt) <= threshold) ++r.matched;
      }
    }
  }
  r.accuracy = r.total_gt > 0 ? static_cast<double>(r.matched) / static_cast<double>(r.total_gt) : 0.0;
  return r;
}

}  // namespace s2r::lane
