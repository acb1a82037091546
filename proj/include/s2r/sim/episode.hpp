#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "s2r/core/image_io.hpp"
#include "s2r/sim/camera.hpp"
#include "s2r/sim/detector.hpp"
#include "s2r/sim/render.hpp"
#include "s2r/sim/scene.hpp"
#include "s2r/sim/style.hpp"
#include "s2r/sim/track.hpp"
#include "s2r/sim/vehicle.hpp"
#include "s2r/traj/trajectory.hpp"

namespace s2r::sim {

struct EpisodeConfig {
  TrackSpec track = curve_track();
  SceneSpec scene;
  CameraSpec camera;
  StylePreset style = StylePreset::crisp();
  ControllerParams controller;
  DetectorParams detector;
  double speed = kDefaultSpeed;
  double init_lateral_offset = 0.0;  // m, positive left
  double duration = 60.0;            // s
  double start_jitter = 2.0;         // m, seeded start position spread along the track
  std::optional<double> forced_steer;        // overrides the controller when set
  std::optional<std::filesystem::path> frame_dir;  // dump styled frames as PNG
};

struct StepRecord {
  double t = 0.0;
  double s = 0.0;
  double offset = 0.0;  // signed, positive left
  double steer = 0.0;   // command applied after this sample (0 for the last)
  bool detected = false;
};

struct SimLog {
  traj::Trajectory trajectory;
  std::vector<StepRecord> steps;
  std::string termination;  // "duration", "lap_complete", "track_end", "off_road"
  std::uint64_t seed = 0;
  long frames_rendered = 0;
  long commands = 0;
  long state_updates = 0;
  long detection_failures = 0;

  std::vector<traj::OffsetSample> offsets() const {
    std::vector<traj::OffsetSample> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back({s.t, s.s, s.offset});
    return out;
  }
};

/// Seed of the i-th episode of a batch.
inline std::uint64_t episode_seed(std::uint64_t base, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// Lockstep closed loop. Each control step renders one frame, styles it,
/// detects the lane, computes one steering command and advances the vehicle
/// once; the world never moves without a command. A failed detection holds
/// the previous command.
inline SimLog run_episode(const EpisodeConfig& cfg, std::uint64_t seed) {
  cfg.scene.validate();
  cfg.camera.validate();
  cfg.controller.validate();
  cfg.style.validate();
  require(cfg.duration > 0.0, "episode duration must be positive");
  require(cfg.speed >= 0.0, "speed must be nonnegative");
  const Track track(cfg.track);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, cfg.start_jitter);
  const double s0 = cfg.start_jitter > 0.0 ? jitter(rng) : 0.0;
  const Pose start = track.offset_pose(s0, cfg.init_lateral_offset);
  VehicleState state{start.p.x, start.p.y, start.heading, cfg.speed};

  if (cfg.frame_dir) std::filesystem::create_directories(*cfg.frame_dir);

  SimLog log;
  log.seed = seed;
  log.trajectory.label = cfg.style.name;
  auto record = [&](double t) {
    const TrackCoord tc = track.project({state.x, state.y});
    log.trajectory.samples.push_back({t, {state.x, state.y}});
    log.steps.push_back({t, tc.s, tc.n, 0.0, false});
    return tc;
  };
  TrackCoord tc = record(0.0);
  double progress = 0.0;
  double last_s = tc.s;
  double steer = 0.0;
  const double dt = cfg.controller.dt;
  for (long k = 0;; ++k) {
    const double t = k * dt;
    if (t >= cfg.duration - 1e-9) {
      log.termination = "duration";
      break;
    }
    const Image frame = render_frame(cfg.scene, cfg.camera, state, track);
    ++log.frames_rendered;
    const Image styled = apply_style(frame, cfg.style, rng());
    if (cfg.frame_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%06ld.png", k);
      save_image(styled, *cfg.frame_dir / name);
    }
    const auto est = detect_lane_center(styled, cfg.camera, cfg.detector);
    if (cfg.forced_steer) {
      steer = *cfg.forced_steer;
    } else if (est) {
      steer = pure_pursuit(est->lateral_error, est->heading_error, state, cfg.controller);
    } else {
      ++log.detection_failures;
    }
    ++log.commands;
    log.steps.back().steer = steer;
    log.steps.back().detected = est.has_value();

    state = step_vehicle(state, steer, dt, cfg.controller.wheelbase);
    ++log.state_updates;
    tc = record((k + 1) * dt);

    if (std::abs(tc.n) > cfg.scene.road_width) {
      log.termination = "off_road";
      break;
    }
    if (track.closed()) {
      double ds = tc.s - last_s;
      if (ds < -0.5 * track.length()) ds += track.length();
      if (ds > 0.5 * track.length()) ds -= track.length();
      progress += ds;
      last_s = tc.s;
      if (progress >= track.length()) {
        log.termination = "lap_complete";
        break;
      }
    } else if (tc.s >= track.length()) {
      log.termination = "track_end";
      break;
    }
  }
  return log;
}

}  // namespace s2r::sim
