#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "s2r/core/image.hpp"
#include "s2r/sim/camera.hpp"

namespace s2r::sim {

struct DetectorParams {
  double threshold = 150.0;       // luminance for paint
  double max_range = 20.0;        // m, farthest ground row considered
  double gate = 0.6;              // m, boundary association gate
  double seed_window = 6.0;       // m beyond the nearest point used to seed a boundary
  double quad_min_span = 8.0;     // m of boundary coverage needed for a curved fit
  int min_points = 3;
  std::vector<double> lookahead = {4, 5, 6, 7, 8, 9, 10, 11, 12};  // m
};

/// Lane-center line in the vehicle frame: passes `lateral_error` metres left
/// of the axle (negative = center is to the right) at angle `heading_error`.
struct LaneEstimate {
  double lateral_error = 0.0;
  double heading_error = 0.0;
  int left_points = 0;
  int right_points = 0;
};

namespace detail {

struct BoundaryFit {
  Eigen::Vector3d coef = Eigen::Vector3d::Zero();  // c0 + c1 F + c2 F^2
  int points = 0;

  double at(double f) const { return coef[0] + coef[1] * f + coef[2] * f * f; }
};

inline BoundaryFit fit_boundary(const std::vector<GroundPoint>& pts, bool quadratic) {
  const int cols = quadratic ? 3 : 2;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(pts.size()), cols);
  Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = 1.0;
    a(r, 1) = pts[i].forward;
    if (quadratic) a(r, 2) = pts[i].forward * pts[i].forward;
    b(r) = pts[i].left;
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  BoundaryFit fit;
  fit.coef.head(cols) = x;
  fit.points = static_cast<int>(pts.size());
  return fit;
}

// Grows one ego boundary outward from the point nearest the vehicle axis on
// the requested side, associating points within `gate` of the running fit.
inline std::optional<BoundaryFit> track_boundary(const std::vector<GroundPoint>& pts, bool left_side,
                                                 const DetectorParams& p) {
  std::vector<GroundPoint> side;
  for (const auto& g : pts) {
    if ((left_side && g.left > 0.0) || (!left_side && g.left < 0.0)) side.push_back(g);
  }
  if (static_cast<int>(side.size()) < p.min_points) return std::nullopt;
  double near_f = side.front().forward;
  for (const auto& g : side) near_f = std::min(near_f, g.forward);
  const GroundPoint* seed = nullptr;
  for (const auto& g : side) {
    if (g.forward > near_f + p.seed_window) continue;
    if (!seed || std::abs(g.left) < std::abs(seed->left)) seed = &g;
  }
  std::vector<GroundPoint> members;
  for (const auto& g : pts) {
    if (g.forward <= near_f + p.seed_window && std::abs(g.left - seed->left) < p.gate) members.push_back(g);
  }
  BoundaryFit fit;
  for (int iter = 0; iter < 3; ++iter) {
    if (static_cast<int>(members.size()) < p.min_points) return std::nullopt;
    double lo = members.front().forward, hi = lo;
    for (const auto& g : members) {
      lo = std::min(lo, g.forward);
      hi = std::max(hi, g.forward);
    }
    fit = fit_boundary(members, members.size() >= 6 && hi - lo >= p.quad_min_span);
    std::vector<GroundPoint> next;
    for (const auto& g : pts) {
      if (std::abs(g.left - fit.at(g.forward)) < p.gate) next.push_back(g);
    }
    members = std::move(next);
  }
  if (static_cast<int>(members.size()) < p.min_points) return std::nullopt;
  return fit;
}

}  // namespace detail

/// Paint pixels above a luminance threshold, mapped to the ground through
/// the flat-ground homography (one point per horizontal run). The two ego
/// boundaries are tracked from the vehicle axis outward, center points are
/// taken midway at fixed look-ahead distances and a line through them gives
/// the lateral and heading errors. nullopt when either boundary has fewer
/// than min_points points.
inline std::optional<LaneEstimate> detect_lane_center(const Image& img, const CameraSpec& cam,
                                                      const DetectorParams& p = {}) {
  require(img.width() == cam.width && img.height() == cam.height, "frame size does not match camera");
  const GroundHomography hom(cam);
  std::vector<GroundPoint> pts;
  const int w = img.width();
  const int ch = img.channels();
  for (int y = img.height() - 1; y >= 0; --y) {
    const double v = y + 0.5;
    const auto g0 = hom.to_ground(0.0, v);
    if (!g0 || g0->forward > p.max_range) break;
    const auto row = img.row(y);
    int start = -1;
    for (int x = 0; x <= w; ++x) {
      bool paint = false;
      if (x < w) {
        const double lum = ch == 1 ? row[x]
                                   : 0.299 * row[3 * x] + 0.587 * row[3 * x + 1] + 0.114 * row[3 * x + 2];
        paint = lum > p.threshold;
      }
      if (paint && start < 0) start = x;
      if (!paint && start >= 0) {
        const double uc = 0.5 * (start + x);
        pts.push_back(*hom.to_ground(uc, v));
        start = -1;
      }
    }
  }
  const auto left = detail::track_boundary(pts, true, p);
  const auto right = detail::track_boundary(pts, false, p);
  if (!left || !right) return std::nullopt;

  Eigen::MatrixXd a(static_cast<Eigen::Index>(p.lookahead.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(p.lookahead.size()));
  for (std::size_t i = 0; i < p.lookahead.size(); ++i) {
    const double f = p.lookahead[i];
    a(static_cast<Eigen::Index>(i), 0) = 1.0;
    a(static_cast<Eigen::Index>(i), 1) = f;
    b(static_cast<Eigen::Index>(i)) = 0.5 * (left->at(f) + right->at(f));
  }
  const Eigen::Vector2d line = a.colPivHouseholderQr().solve(b);
  return LaneEstimate{line[0], std::atan(line[1]), left->points, right->points};
}

}  // namespace s2r::sim
