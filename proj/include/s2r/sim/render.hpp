#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"
#include "s2r/lane/lane_frame.hpp"
#include "s2r/sim/camera.hpp"
#include "s2r/sim/scene.hpp"
#include "s2r/sim/track.hpp"
#include "s2r/sim/vehicle.hpp"

namespace s2r::sim {

namespace palette {
inline constexpr std::array<double, 3> kSkyTop{120, 160, 215};
inline constexpr std::array<double, 3> kSkyHorizon{200, 212, 228};
inline constexpr std::array<double, 3> kAsphalt{92, 92, 96};
inline constexpr std::array<double, 3> kVerge{72, 98, 58};
inline constexpr std::array<double, 3> kPaint{238, 238, 232};
}  // namespace palette

/// Vehicle must be within this many lane widths of the centerline to render.
inline constexpr double kRenderGuardLanes = 2.0;

namespace detail {

// Marking coverage of a ground point: 0 (bare road) to 1 (paint), with a
// lateral ramp one pixel footprint wide for anti-aliasing.
inline double marking_coverage(const SceneSpec& scene, const TrackCoord& tc, double footprint) {
  const double half = 0.5 * scene.line_width;
  double best = 0.0;
  for (int k = 0; k < scene.line_count(); ++k) {
    const double d = std::abs(tc.n - scene.line_offset(k));
    if (d > half + footprint) continue;
    if (scene.line_dashed(k)) {
      const double period = scene.line_length + scene.line_spacing;
      double phase = std::fmod(tc.s, period);
      if (phase < 0.0) phase += period;
      if (phase >= scene.line_length) continue;
    }
    best = std::max(best, std::clamp((half - d) / footprint + 0.5, 0.0, 1.0));
  }
  return best;
}

inline void check_guard(const SceneSpec& scene, const VehicleState& state, const Track& track) {
  const auto tc = track.project({state.x, state.y});
  if (std::abs(tc.n) > kRenderGuardLanes * scene.road_width) {
    throw ValidationError("vehicle off-road beyond render guard (lateral offset " + std::to_string(tc.n) + " m)");
  }
}

// Calls fn(x, y, coverage, on_road) for each ground pixel and sky(x, y, v)
// for pixels at or above the horizon.
template <typename GroundFn, typename SkyFn>
void scan_scene(const SceneSpec& scene, const CameraSpec& cam, const VehicleState& state, const Track& track,
                GroundFn&& ground, SkyFn&& sky) {
  scene.validate();
  const GroundHomography hom(cam);
  const Vec2 fwd{std::cos(state.heading), std::sin(state.heading)};
  const Vec2 left{-fwd.y, fwd.x};
  const Vec2 origin{state.x, state.y};
  const double f = hom.focal();
  for (int y = 0; y < cam.height; ++y) {
    const double v = y + 0.5;
    const auto depth = hom.row_depth(v);
    if (!depth) {
      for (int x = 0; x < cam.width; ++x) sky(x, y);
      continue;
    }
    const double forward = hom.to_ground(0.0, v)->forward;
    const double footprint = *depth / f;
    // Lateral ground coordinate is linear in u along a row, and track
    // coordinates vary smoothly with it. Exact projections are taken every
    // kBlock pixels and interpolated in between unless the two ends fall on
    // different track pieces.
    const Vec2 row_base = origin + forward * fwd;
    auto lateral_at = [&](double u) { return -(*depth) * (u - hom.cx()) / f; };
    auto coord_at = [&](double u) { return track.project_piece(row_base + lateral_at(u) * left); };
    auto emit = [&](int x, const TrackCoord& tc) {
      const bool on_road = tc.n <= scene.road_left_edge() && tc.n >= scene.road_right_edge();
      const double cov = on_road ? marking_coverage(scene, tc, footprint) : 0.0;
      ground(x, y, cov, on_road);
    };
    constexpr int kBlock = 8;
    auto lo = coord_at(0.5);
    for (int x0 = 0; x0 < cam.width; x0 += kBlock) {
      const int anchor = std::min(x0 + kBlock, cam.width - 1);
      const int end = std::min(x0 + kBlock, cam.width);
      const auto hi = coord_at(anchor + 0.5);
      if (lo.piece == hi.piece && anchor > x0) {
        const double inv = 1.0 / (anchor - x0);
        for (int x = x0; x < end; ++x) {
          const double a = (x - x0) * inv;
          emit(x, {lo.coord.s + a * (hi.coord.s - lo.coord.s), lo.coord.n + a * (hi.coord.n - lo.coord.n)});
        }
      } else {
        for (int x = x0; x < end; ++x) emit(x, x == x0 ? lo.coord : coord_at(x + 0.5).coord);
      }
      lo = hi;
    }
  }
}

inline double gamma_encode(double v, double gamma) { return 255.0 * std::pow(std::clamp(v / 255.0, 0.0, 1.0), 1.0 / gamma); }

}  // namespace detail

/// Camera view of the road: sky, verge, asphalt and lane paint. Paint
/// contrast over asphalt scales with texture_sharpness.
inline Image render_frame(const SceneSpec& scene, const CameraSpec& cam, const VehicleState& state, const Track& track) {
  detail::check_guard(scene, state, track);
  Image img(cam.width, cam.height, 3);
  // Tone curves are per-channel lookups over a quantized coverage ramp.
  std::array<std::array<std::uint8_t, 3>, 257> road_lut{};
  std::array<std::uint8_t, 3> verge{};
  for (int c = 0; c < 3; ++c) {
    const double paint = palette::kAsphalt[c] + scene.texture_sharpness * (palette::kPaint[c] - palette::kAsphalt[c]);
    for (int q = 0; q <= 256; ++q) {
      const double cov = q / 256.0;
      road_lut[q][c] = clamp_u8(detail::gamma_encode(palette::kAsphalt[c] + cov * (paint - palette::kAsphalt[c]), cam.gamma));
    }
    verge[c] = clamp_u8(detail::gamma_encode(palette::kVerge[c], cam.gamma));
  }
  const GroundHomography hom(cam);
  const double horizon = std::max(1.0, hom.horizon_v());
  std::vector<std::array<std::uint8_t, 3>> sky(cam.height);
  for (int y = 0; y < cam.height && y < horizon + 1.0; ++y) {
    const double k = std::clamp((y + 0.5) / horizon, 0.0, 1.0);
    for (int c = 0; c < 3; ++c) {
      sky[y][c] = clamp_u8(
          detail::gamma_encode(palette::kSkyTop[c] + k * (palette::kSkyHorizon[c] - palette::kSkyTop[c]), cam.gamma));
    }
  }
  auto data = img.data();
  detail::scan_scene(
      scene, cam, state, track,
      [&](int x, int y, double cov, bool on_road) {
        const std::size_t i = (static_cast<std::size_t>(y) * cam.width + x) * 3;
        if (on_road) {
          const auto& px = road_lut[static_cast<int>(std::lround(cov * 256.0))];
          data[i] = px[0];
          data[i + 1] = px[1];
          data[i + 2] = px[2];
        } else {
          data[i] = verge[0];
          data[i + 1] = verge[1];
          data[i + 2] = verge[2];
        }
      },
      [&](int x, int y) {
        const std::size_t i = (static_cast<std::size_t>(y) * cam.width + x) * 3;
        for (int c = 0; c < 3; ++c) data[i + c] = sky[y][c];
      });
  return img;
}

/// Same projection as render_frame; pixels whose center lies on paint get
/// exactly lane_color, everything else black.
inline lane::SegmentationRaster render_segmentation(const SceneSpec& scene, const CameraSpec& cam,
                                                    const VehicleState& state, const Track& track,
                                                    lane::Rgb lane_color = {255, 255, 255}) {
  detail::check_guard(scene, state, track);
  lane::SegmentationRaster out{Image(cam.width, cam.height, 3), lane_color};
  auto data = out.image.data();
  detail::scan_scene(
      scene, cam, state, track,
      [&](int x, int y, double cov, bool) {
        if (cov < 0.5) return;
        const std::size_t i = (static_cast<std::size_t>(y) * cam.width + x) * 3;
        data[i] = lane_color.r;
        data[i + 1] = lane_color.g;
        data[i + 2] = lane_color.b;
      },
      [](int, int) {});
  return out;
}

}  // namespace s2r::sim
