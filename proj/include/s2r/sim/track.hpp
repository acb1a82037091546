#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/traj/trajectory.hpp"

namespace s2r::sim {

using traj::Vec2;

struct Straight {
  double length = 0.0;  // m
};

/// Circular arc; positive angle turns left, negative turns right.
struct Arc {
  double radius = 0.0;     // m
  double angle_deg = 0.0;  // signed sweep
};

using TrackSegment = std::variant<Straight, Arc>;

inline constexpr double kClosureTolerance = 0.5;  // m

struct TrackSpec {
  std::vector<TrackSegment> segments;
  bool closed = false;
  Vec2 origin{0.0, 0.0};
  double origin_heading = 0.0;  // radians, 0 = +x (east)
};

struct Pose {
  Vec2 p;
  double heading = 0.0;
};

/// Point relative to the track: arclength and signed lateral offset
/// (positive left of the travel direction).
struct TrackCoord {
  double s = 0.0;
  double n = 0.0;
};

/// Built track geometry. The centerline is the middle of the ego lane.
class Track {
 public:
  explicit Track(TrackSpec spec) : spec_(std::move(spec)) {
    require(!spec_.segments.empty(), "track needs at least one segment");
    Pose pose{spec_.origin, spec_.origin_heading};
    double s = 0.0;
    for (const auto& seg : spec_.segments) {
      Piece pc;
      pc.start = pose;
      pc.s0 = s;
      if (const auto* st = std::get_if<Straight>(&seg)) {
        require(st->length > 0.0, "straight length must be positive");
        pc.length = st->length;
        pc.dir = {std::cos(pose.heading), std::sin(pose.heading)};
      } else {
        const auto& arc = std::get<Arc>(seg);
        require(arc.radius > 0.0 && arc.angle_deg != 0.0, "arc needs positive radius and nonzero angle");
        pc.is_arc = true;
        pc.turn = arc.angle_deg > 0.0 ? 1.0 : -1.0;
        pc.radius = arc.radius;
        pc.sweep = std::abs(arc.angle_deg) * std::numbers::pi / 180.0;
        pc.length = pc.radius * pc.sweep;
        const Vec2 left{-std::sin(pose.heading), std::cos(pose.heading)};
        pc.center = pose.p + (pc.turn * pc.radius) * left;
        pc.phi0 = std::atan2(pose.p.y - pc.center.y, pose.p.x - pc.center.x);
      }
      pose = pc.pose_at(pc.length);
      s += pc.length;
      pieces_.push_back(pc);
    }
    length_ = s;
    if (spec_.closed) {
      const double gap = traj::norm(pose.p - spec_.origin);
      if (gap > kClosureTolerance) {
        throw ValidationError("closed track does not return to its start (gap " + std::to_string(gap) + " m)");
      }
    }
  }

  double length() const { return length_; }
  bool closed() const { return spec_.closed; }
  const TrackSpec& spec() const { return spec_; }

  /// Pose on the centerline at arclength s. Closed tracks wrap; open tracks
  /// continue straight beyond either end.
  Pose pose_at(double s) const {
    if (spec_.closed) {
      s = std::fmod(s, length_);
      if (s < 0.0) s += length_;
    }
    if (s <= 0.0) return pieces_.front().pose_at(s);
    for (const auto& pc : pieces_) {
      if (s <= pc.s0 + pc.length) return pc.pose_at(s - pc.s0);
    }
    const auto& last = pieces_.back();
    const Pose end = last.pose_at(last.length);
    const double extra = s - length_;
    return {end.p + extra * Vec2{std::cos(end.heading), std::sin(end.heading)}, end.heading};
  }

  /// Pose displaced laterally by `n` (positive left).
  Pose offset_pose(double s, double n) const {
    const Pose c = pose_at(s);
    return {c.p + n * Vec2{-std::sin(c.heading), std::cos(c.heading)}, c.heading};
  }

  /// Nearest centerline coordinate. Open tracks extend tangentially past
  /// their ends, so s may be negative or exceed length().
  TrackCoord project(Vec2 p) const { return project_piece(p).coord; }

  struct PieceCoord {
    TrackCoord coord;
    std::size_t piece = 0;
  };

  /// As project(), also reporting which segment the nearest point lies on.
  PieceCoord project_piece(Vec2 p) const {
    double best = std::numeric_limits<double>::infinity();
    PieceCoord out;
    const std::size_t last = pieces_.size() - 1;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const bool open_front = !spec_.closed && i == 0;
      const bool open_back = !spec_.closed && i == last;
      double dist = 0.0;
      const TrackCoord c = pieces_[i].project(p, open_front, open_back, dist);
      if (dist < best) {
        best = dist;
        out = {c, i};
      }
    }
    return out;
  }

  /// Centerline sampled every `spacing` metres (plus the end point).
  traj::Centerline centerline(double spacing = 0.5) const {
    std::vector<Vec2> pts;
    const int n = static_cast<int>(std::ceil(length_ / spacing));
    for (int i = 0; i <= n; ++i) pts.push_back(pose_at(std::min(length_, i * spacing)).p);
    if (spec_.closed && traj::norm(pts.back() - pts.front()) < 1e-9) pts.back() = pose_at(length_ - 1e-6).p;
    // drop duplicates from the final clamp
    std::vector<Vec2> clean;
    for (const auto& q : pts) {
      if (clean.empty() || traj::norm(q - clean.back()) > 1e-9) clean.push_back(q);
    }
    return traj::Centerline(std::move(clean));
  }

  struct SegmentRange {
    double start_s = 0.0;
    double end_s = 0.0;
    bool is_arc = false;
  };

  std::vector<SegmentRange> segment_ranges() const {
    std::vector<SegmentRange> out;
    for (const auto& pc : pieces_) out.push_back({pc.s0, pc.s0 + pc.length, pc.is_arc});
    return out;
  }

  /// Curvature (1/m, positive left) at arclength s.
  double curvature_at(double s) const {
    if (spec_.closed) {
      s = std::fmod(s, length_);
      if (s < 0.0) s += length_;
    }
    for (const auto& pc : pieces_) {
      if (s >= pc.s0 && s <= pc.s0 + pc.length) return pc.is_arc ? pc.turn / pc.radius : 0.0;
    }
    return 0.0;
  }

 private:
  struct Piece {
    Pose start;
    double s0 = 0.0;
    double length = 0.0;
    Vec2 dir;  // straights
    bool is_arc = false;
    double turn = 1.0;
    double radius = 0.0;
    double sweep = 0.0;
    Vec2 center;
    double phi0 = 0.0;

    Pose pose_at(double u) const {
      if (!is_arc) return {start.p + u * dir, start.heading};
      const double phi = phi0 + turn * u / radius;
      return {center + radius * Vec2{std::cos(phi), std::sin(phi)}, start.heading + turn * u / radius};
    }

    TrackCoord project(Vec2 p, bool open_front, bool open_back, double& dist) const {
      if (!is_arc) {
        const Vec2 d = p - start.p;
        double u = traj::dot(d, dir);
        const double n = traj::cross(dir, d);
        if (u < 0.0 && !open_front) {
          dist = traj::norm(d);
          return {s0, n};
        }
        if (u > length && !open_back) {
          dist = traj::norm(p - (start.p + length * dir));
          return {s0 + length, n};
        }
        dist = std::abs(n);
        return {s0 + u, n};
      }
      const Vec2 r = p - center;
      const double rn = traj::norm(r);
      double theta = turn * (std::atan2(r.y, r.x) - phi0);
      theta = std::fmod(theta, 2.0 * std::numbers::pi);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      const double n = turn * (radius - rn);
      if (theta <= sweep) {
        dist = std::abs(n);
        return {s0 + radius * theta, n};
      }
      // Outside the sweep: clamp to the nearer end (or extend tangentially).
      const bool near_end = (theta - sweep) < (2.0 * std::numbers::pi - theta);
      const Pose e = pose_at(near_end ? length : 0.0);
      const Vec2 t{std::cos(e.heading), std::sin(e.heading)};
      const Vec2 d = p - e.p;
      const double along = traj::dot(d, t);
      const double lat = traj::cross(t, d);
      if ((near_end && open_back) || (!near_end && open_front)) {
        dist = std::abs(lat);
        return {s0 + (near_end ? length : 0.0) + along, lat};
      }
      dist = traj::norm(d);
      return {s0 + (near_end ? length : 0.0), lat};
    }
  };

  TrackSpec spec_;
  std::vector<Piece> pieces_;
  double length_ = 0.0;
};

/// Straight road of the given length.
inline TrackSpec straight_track(double length) { return {{Straight{length}}, false, {0, 0}, 0.0}; }

/// Straight lead-in, one constant-radius left arc, straight run-out.
inline TrackSpec curve_track(double radius = 150.0, double angle_deg = 45.0, double lead = 60.0, double tail = 60.0) {
  return {{Straight{lead}, Arc{radius, angle_deg}, Straight{tail}}, false, {0, 0}, 0.0};
}

/// Closed loop: two straights joined by two 180-degree left arcs.
inline TrackSpec oval_track(double straight = 200.0, double radius = 150.0) {
  return {{Straight{straight}, Arc{radius, 180.0}, Straight{straight}, Arc{radius, 180.0}}, true, {0, 0}, 0.0};
}

}  // namespace s2r::sim
