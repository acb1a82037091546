#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include "s2r/core/error.hpp"

namespace s2r::sim {

/// Forward-looking pinhole camera over a flat ground plane. Mounted at the
/// vehicle reference point; negative pitch looks down.
struct CameraSpec {
  double h_fov_deg = 76.0;
  int width = 808;
  int height = 620;
  double mount_height = 1.4;  // m
  double pitch_deg = -4.0;
  double gamma = 0.8;

  void validate() const {
    require(h_fov_deg > 0.0 && h_fov_deg < 180.0, "camera h_fov must be in (0, 180)");
    require(width > 0 && height > 0, "camera resolution must be positive");
    require(mount_height > 0.0, "camera mount height must be positive");
    require(gamma > 0.0, "camera gamma must be positive");
  }

  double focal() const { return 0.5 * width / std::tan(0.5 * h_fov_deg * std::numbers::pi / 180.0); }
  double cx() const { return 0.5 * width; }
  double cy() const { return 0.5 * height; }
  double tilt() const { return -pitch_deg * std::numbers::pi / 180.0; }  // downward angle
};

/// Ground point in the vehicle frame: forward and left of the camera, metres.
struct GroundPoint {
  double forward = 0.0;
  double left = 0.0;
};

/// Image <-> ground mapping under the flat-ground assumption. Pixel
/// coordinates are continuous: pixel (i, j) spans [i, i+1) x [j, j+1).
class GroundHomography {
 public:
  explicit GroundHomography(const CameraSpec& cam)
      : f_(cam.focal()), cx_(cam.cx()), cy_(cam.cy()), h_(cam.mount_height),
        ct_(std::cos(cam.tilt())), st_(std::sin(cam.tilt())) {
    cam.validate();
  }

  /// Depth along the optical axis of ground seen at image row coordinate v,
  /// or nullopt at/above the horizon.
  std::optional<double> row_depth(double v) const {
    const double b = (v - cy_) / f_;
    const double denom = b * ct_ + st_;
    if (denom <= 1e-9) return std::nullopt;
    return h_ / denom;
  }

  std::optional<GroundPoint> to_ground(double u, double v) const {
    const auto t = row_depth(v);
    if (!t) return std::nullopt;
    const double a = (u - cx_) / f_;
    const double b = (v - cy_) / f_;
    return GroundPoint{*t * (ct_ - b * st_), -*t * a};
  }

  /// Projects a ground point; nullopt when behind the camera.
  std::optional<std::pair<double, double>> to_image(const GroundPoint& g) const {
    // camera coords: x right, y down, z forward
    const double z = g.forward * ct_ + h_ * st_;
    if (z <= 1e-9) return std::nullopt;
    const double x = -g.left;
    const double y = -g.forward * st_ + h_ * ct_;
    return std::make_pair(cx_ + f_ * x / z, cy_ + f_ * y / z);
  }

  double horizon_v() const { return cy_ - f_ * st_ / ct_; }
  double focal() const { return f_; }
  double cx() const { return cx_; }

 private:
  double f_, cx_, cy_, h_, ct_, st_;
};

}  // namespace s2r::sim
