#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/traj/utm.hpp"

namespace s2r::traj {

/// Planar metric position (UTM easting/northing or any local metric frame).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

inline constexpr double kMaxSampleGap = 10.0;  // metres

struct TrajectorySample {
  double t = 0.0;
  Vec2 p;
};

struct Trajectory {
  std::string label;
  std::optional<UtmZone> zone;
  std::vector<TrajectorySample> samples;

  /// Time strictly increasing and no jump of kMaxSampleGap metres or more.
  void validate() const {
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (!(samples[i].t > samples[i - 1].t)) {
        throw ValidationError("trajectory '" + label + "': time not strictly increasing at sample " + std::to_string(i));
      }
      const double gap = norm(samples[i].p - samples[i - 1].p);
      if (gap >= kMaxSampleGap) {
        throw ValidationError("trajectory '" + label + "': discontinuity of " + std::to_string(gap) +
                              " m at sample " + std::to_string(i));
      }
    }
  }
};

/// Reference polyline with cumulative arclength.
class Centerline {
 public:
  Centerline() = default;

  explicit Centerline(std::vector<Vec2> points, std::optional<UtmZone> zone = std::nullopt)
      : points_(std::move(points)), zone_(zone) {
    require(points_.size() >= 2, "centerline needs at least 2 points");
    arclength_.resize(points_.size(), 0.0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const double len = norm(points_[i] - points_[i - 1]);
      require(len > 0.0, "centerline has a zero-length segment at vertex " + std::to_string(i));
      arclength_[i] = arclength_[i - 1] + len;
    }
  }

  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<double>& arclength() const { return arclength_; }
  double length() const { return arclength_.back(); }
  const std::optional<UtmZone>& zone() const { return zone_; }

 private:
  std::vector<Vec2> points_;
  std::vector<double> arclength_;
  std::optional<UtmZone> zone_;
};

struct Projection {
  Vec2 foot;
  double s = 0.0;
  double offset = 0.0;  // signed, positive left of the travel direction
};

/// Orthogonal projection onto the closest segment. Ties keep the smaller
/// arclength; points past either end clamp to the endpoint.
inline Projection nearest_on_polyline(Vec2 p, const Centerline& c) {
  const auto& pts = c.points();
  const auto& s = c.arclength();
  double best = std::numeric_limits<double>::infinity();
  Projection out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i];
    const Vec2 d = pts[i + 1] - a;
    const double len2 = dot(d, d);
    const double u = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
    const Vec2 foot = a + u * d;
    const double dist = norm(p - foot);
    if (dist < best) {
      best = dist;
      out.foot = foot;
      out.s = s[i] + u * (s[i + 1] - s[i]);
      out.offset = cross(d, p - foot) < 0.0 ? -dist : dist;
    }
  }
  return out;
}

inline void check_zones(const Trajectory& t, const Centerline& c) {
  if (t.zone && c.zone() && !(*t.zone == *c.zone())) {
    throw ValidationError("UTM zone mismatch between trajectory and centerline");
  }
}

struct OffsetSample {
  double t = 0.0;
  double s = 0.0;
  double offset = 0.0;
};

inline std::vector<OffsetSample> lateral_offsets(const Trajectory& traj, const Centerline& c) {
  check_zones(traj, c);
  std::vector<OffsetSample> out;
  out.reserve(traj.samples.size());
  for (const auto& smp : traj.samples) {
    const auto pr = nearest_on_polyline(smp.p, c);
    out.push_back({smp.t, pr.s, pr.offset});
  }
  return out;
}

}  // namespace s2r::traj
