#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/traj/trajectory.hpp"

namespace s2r::traj {

/// Arclength interval [start_s, end_s] along the centerline.
struct SectionSpec {
  std::string name;
  double start_s = 0.0;
  double end_s = 0.0;

  void validate(double total_length) const {
    require(start_s >= 0.0 && start_s < end_s && end_s <= total_length + 1e-9,
            "section '" + name + "' must satisfy 0 <= start < end <= centerline length");
  }
};

struct SectionRmse {
  std::string name;
  double rmse_x = 0.0;  // easting residual
  double rmse_y = 0.0;  // northing residual
  std::size_t n = 0;
};

/// Root-mean-square easting and northing residuals between trajectory samples
/// and their centerline feet, over samples whose foot falls in the section.
inline SectionRmse section_rmse(const Trajectory& traj, const Centerline& c, const SectionSpec& sec) {
  check_zones(traj, c);
  sec.validate(c.length());
  SectionRmse r{sec.name, 0.0, 0.0, 0};
  double sx = 0.0, sy = 0.0;
  for (const auto& smp : traj.samples) {
    const auto pr = nearest_on_polyline(smp.p, c);
    if (pr.s < sec.start_s || pr.s > sec.end_s) continue;
    const double dx = smp.p.x - pr.foot.x, dy = smp.p.y - pr.foot.y;
    sx += dx * dx;
    sy += dy * dy;
    ++r.n;
  }
  if (r.n == 0) throw ValidationError("empty section: no samples fall in section '" + sec.name + "'");
  r.rmse_x = std::sqrt(sx / static_cast<double>(r.n));
  r.rmse_y = std::sqrt(sy / static_cast<double>(r.n));
  return r;
}

struct RestoreSpec {
  double return_band = 0.2;     // m
  double t_max = 120.0;         // s
  double stable_window = 10.0;  // s
  double stable_band = 0.3;     // m

  void validate() const {
    require(return_band > 0 && t_max > 0 && stable_window > 0 && stable_band > 0,
            "restore parameters must be positive");
  }
};

struct RestoreVerdict {
  bool success = false;
  std::optional<double> return_time;
  std::string reason;  // "returned", "never returned", "unstable", "insufficient data"
};

/// Success when the offset first enters the return band at some t* <= t_max
/// and stays inside the stable band over [t*, t* + stable_window].
inline RestoreVerdict restoring_verdict(const std::vector<OffsetSample>& offsets, const RestoreSpec& spec = {}) {
  spec.validate();
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    require(offsets[i].t > offsets[i - 1].t, "offsets must be time-ordered");
  }
  bool any_candidate = false;
  bool any_complete_window = false;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const double t0 = offsets[i].t;
    if (t0 > spec.t_max) break;
    if (std::abs(offsets[i].offset) > spec.return_band) continue;
    any_candidate = true;
    const double t_end = t0 + spec.stable_window;
    if (offsets.back().t < t_end) continue;
    any_complete_window = true;
    bool stable = true;
    for (std::size_t j = i; j < offsets.size() && offsets[j].t <= t_end; ++j) {
      if (std::abs(offsets[j].offset) > spec.stable_band) {
        stable = false;
        break;
      }
    }
    if (stable) return {true, t0, "returned"};
  }
  if (!any_candidate) return {false, std::nullopt, "never returned"};
  if (!any_complete_window) return {false, std::nullopt, "insufficient data"};
  return {false, std::nullopt, "unstable"};
}

/// 100 * successes / total, rounded to one decimal.
inline double success_rate(const std::vector<bool>& outcomes) {
  require(!outcomes.empty(), "success_rate needs at least one outcome");
  std::size_t k = 0;
  for (bool b : outcomes) k += b ? 1 : 0;
  return std::round(1000.0 * static_cast<double>(k) / static_cast<double>(outcomes.size())) / 10.0;
}

}  // namespace s2r::traj
