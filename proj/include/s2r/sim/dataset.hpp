#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "s2r/core/image_io.hpp"
#include "s2r/core/parallel.hpp"
#include "s2r/sim/render.hpp"
#include "s2r/sim/style.hpp"

namespace s2r::sim {

struct PoseJitter {
  double lateral = 0.3;      // m, uniform in [-lateral, lateral]
  double heading_deg = 2.0;  // uniform in [-heading_deg, heading_deg]
};

/// Seeded camera poses spread along the track. Every member of a series
/// reuses the same poses so only the scene parameter differs.
inline std::vector<VehicleState> sample_poses(const Track& track, int count, std::uint64_t seed,
                                              const PoseJitter& jitter = {}) {
  require(count > 0, "frame count must be positive");
  require(jitter.lateral >= 0.0 && jitter.heading_deg >= 0.0, "pose jitter must be nonnegative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> along(0.0, track.length());
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<VehicleState> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double s = along(rng);
    const double n = jitter.lateral * unit(rng);
    const double dh = jitter.heading_deg * std::numbers::pi / 180.0 * unit(rng);
    const Pose p = track.offset_pose(s, n);
    out.push_back({p.p.x, p.p.y, p.heading + dh, 0.0});
  }
  return out;
}

struct SeriesMember {
  std::string name;
  SceneSpec scene;
};

/// Scene variations of one lane characteristic; the first member is the
/// reference. "single" is just the base scene.
inline std::vector<SeriesMember> series_members(const std::string& series, const SceneSpec& base) {
  std::vector<SeriesMember> out;
  auto add = [&](std::string name, auto&& edit) {
    SceneSpec s = base;
    edit(s);
    out.push_back({std::move(name), s});
  };
  char buf[64];
  if (series == "thickness") {
    for (double w : {0.125, 0.15, 0.175, 0.2}) {
      std::snprintf(buf, sizeof buf, "width_%.3f", w);
      add(buf, [&](SceneSpec& s) {
        s.line_width = w;
        s.line_length = 10.0;
        s.line_spacing = 10.0;
      });
    }
  } else if (series == "texture") {
    for (double t : {1.0, 0.6, 0.3}) {
      std::snprintf(buf, sizeof buf, "texture_%.1f", t);
      add(buf, [&](SceneSpec& s) { s.texture_sharpness = t; });
    }
  } else if (series == "spacing") {
    for (double l : {10.0, 5.0, 3.0}) {
      std::snprintf(buf, sizeof buf, "spacing_%g_%g", l, l);
      add(buf, [&](SceneSpec& s) {
        s.line_length = l;
        s.line_spacing = l;
      });
    }
  } else if (series == "single") {
    add("scene", [](SceneSpec&) {});
  } else {
    throw ValidationError("unknown series '" + series + "' (expected thickness, texture, spacing or single)");
  }
  for (const auto& m : out) m.scene.validate();
  return out;
}

/// Styled frames of one scene over the given poses. Frame i gets noise
/// seed seed+i so results do not depend on the thread count.
inline std::vector<Image> render_views(const SceneSpec& scene, const CameraSpec& cam, const Track& track,
                                       const std::vector<VehicleState>& poses, const StylePreset& style,
                                       std::uint64_t seed, int threads = 1) {
  std::vector<Image> out(poses.size());
  parallel_for(poses.size(), threads, [&](std::size_t i) {
    out[i] = apply_style(render_frame(scene, cam, poses[i], track), style, seed + i);
  });
  return out;
}

inline std::string frame_name(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%06zu.png", index);
  return name;
}

}  // namespace s2r::sim
