#pragma once

#include <algorithm>
#include <cmath>

#include "s2r/core/error.hpp"

namespace s2r::sim {

/// Planar pose of the rear-axle reference point plus forward speed.
/// Heading is kept unwrapped so it evolves continuously.
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians
  double speed = 0.0;    // m/s

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

inline constexpr double kDefaultSpeed = 30.0 / 3.6;  // 30 km/h

struct ControllerParams {
  double wheelbase = 2.7;       // m
  double lookahead_base = 4.0;  // m
  double lookahead_gain = 0.5;  // s
  double dt = 0.05;             // s
  double max_steer = 0.6;       // rad

  void validate() const {
    require(wheelbase > 0 && lookahead_base > 0 && lookahead_gain > 0 && dt > 0 && max_steer > 0,
            "controller parameters must be positive");
    require(dt <= 0.1, "controller dt must not exceed 0.1 s");
  }

  double lookahead(double speed) const { return lookahead_base + lookahead_gain * speed; }
};

/// Kinematic bicycle, forward Euler, constant speed.
inline VehicleState step_vehicle(const VehicleState& s, double steer, double dt, double wheelbase = 2.7) {
  require(dt > 0.0, "dt must be positive");
  VehicleState n = s;
  n.x += s.speed * std::cos(s.heading) * dt;
  n.y += s.speed * std::sin(s.heading) * dt;
  n.heading += (s.speed / wheelbase) * std::tan(steer) * dt;
  return n;
}

/// Pure pursuit toward the point of the detected lane-center line at the
/// look-ahead distance. The line passes `lateral_error` to the left of the
/// vehicle at the axle and is rotated by `heading_error`, both in the
/// vehicle frame.
inline double pure_pursuit(double lateral_error, double heading_error, const VehicleState& state,
                           const ControllerParams& p) {
  require(state.speed >= 0.0, "speed must be nonnegative");
  const double ld = p.lookahead(state.speed);
  const double sn = std::sin(heading_error), cs = std::cos(heading_error);
  // Intersection of the line (0, e) + tau (cos, sin) with the circle |q| = ld.
  const double e = lateral_error;
  const double disc = e * e * sn * sn - (e * e - ld * ld);
  double tx, ty;
  if (disc >= 0.0) {
    const double tau = -e * sn + std::sqrt(disc);
    tx = tau * cs;
    ty = e + tau * sn;
  } else {
    // Line farther than ld: aim at its closest point.
    tx = -e * sn * cs;
    ty = e - e * sn * sn;
  }
  const double alpha = std::atan2(ty, tx);
  const double steer = std::atan(2.0 * p.wheelbase * std::sin(alpha) / ld);
  return std::clamp(steer, -p.max_steer, p.max_steer);
}

}  // namespace s2r::sim
