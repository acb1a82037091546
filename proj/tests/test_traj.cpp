#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>

#include "s2r/traj/io.hpp"
#include "s2r/traj/metrics.hpp"
#include "s2r/traj/trajectory.hpp"
#include "s2r/traj/utm.hpp"
#include "support.hpp"

using namespace s2r;
using namespace s2r::traj;
using s2r::testing::TempDir;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kA = 6378137.0;
constexpr double kF = 1.0 / 298.257223563;

// Classic USGS series (Snyder 1987, 8-9/8-10); a different expansion from the
// one under test.
std::pair<double, double> snyder_utm(double lat, double lon, double lon0) {
  const double e2 = kF * (2 - kF), e4 = e2 * e2, e6 = e4 * e2, ep2 = e2 / (1 - e2), k0 = 0.9996;
  const double phi = lat * kDeg;
  const double n = kA / std::sqrt(1 - e2 * std::sin(phi) * std::sin(phi));
  const double t = std::tan(phi) * std::tan(phi);
  const double c = ep2 * std::cos(phi) * std::cos(phi);
  const double a = (lon - lon0) * kDeg * std::cos(phi);
  const double m = kA * ((1 - e2 / 4 - 3 * e4 / 64 - 5 * e6 / 256) * phi -
                         (3 * e2 / 8 + 3 * e4 / 32 + 45 * e6 / 1024) * std::sin(2 * phi) +
                         (15 * e4 / 256 + 45 * e6 / 1024) * std::sin(4 * phi) - (35 * e6 / 3072) * std::sin(6 * phi));
  const double x = k0 * n *
                   (a + (1 - t + c) * std::pow(a, 3) / 6 + (5 - 18 * t + t * t + 72 * c - 58 * ep2) * std::pow(a, 5) / 120);
  const double y =
      k0 * (m + n * std::tan(phi) *
                    (a * a / 2 + (5 - t + 9 * c + 4 * c * c) * std::pow(a, 4) / 24 +
                     (61 - 58 * t + t * t + 600 * c - 330 * ep2) * std::pow(a, 6) / 720));
  return {500000.0 + x, y};
}

// Inverse transverse Mercator (Kruger series to n^3), northern hemisphere.
std::pair<double, double> inverse_utm(double easting, double northing, int zone) {
  const double n = kF / (2 - kF);
  const double rect = kA / (1 + n) * (1 + n * n / 4);
  const double beta[3] = {n / 2 - 2 * n * n / 3 + 37 * n * n * n / 96, n * n / 48 + n * n * n / 15,
                          17 * n * n * n / 480};
  const double delta[3] = {2 * n - 2 * n * n / 3 - 2 * n * n * n, 7 * n * n / 3 - 8 * n * n * n / 5,
                           56 * n * n * n / 15};
  const double xi = northing / (0.9996 * rect), eta = (easting - 500000.0) / (0.9996 * rect);
  double xp = xi, ep = eta;
  for (int j = 1; j <= 3; ++j) {
    xp -= beta[j - 1] * std::sin(2 * j * xi) * std::cosh(2 * j * eta);
    ep -= beta[j - 1] * std::cos(2 * j * xi) * std::sinh(2 * j * eta);
  }
  const double chi = std::asin(std::sin(xp) / std::cosh(ep));
  double phi = chi;
  for (int j = 1; j <= 3; ++j) phi += delta[j - 1] * std::sin(2 * j * chi);
  const double lon0 = -183.0 + 6.0 * zone;
  return {phi / kDeg, lon0 + std::atan2(std::sinh(ep), std::cos(xp)) / kDeg};
}

Centerline straight_x(double length, double step = 1.0) {
  std::vector<Vec2> pts;
  for (double x = 0.0; x <= length + 1e-9; x += step) pts.push_back({x, 0.0});
  return Centerline(pts);
}

Trajectory along(const std::vector<Vec2>& pts, double dt = 0.1) {
  Trajectory t;
  for (std::size_t i = 0; i < pts.size(); ++i) t.samples.push_back({dt * i, pts[i]});
  return t;
}

std::vector<OffsetSample> series(double t_end, double dt, const std::function<double(double)>& f) {
  std::vector<OffsetSample> out;
  for (int i = 0; i * dt <= t_end + 1e-9; ++i) out.push_back({i * dt, 0.0, f(i * dt)});
  return out;
}

double brute_distance(Vec2 p, const Centerline& c) {
  double best = 1e300;
  const auto& v = c.points();
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    // dense sampling of each segment plus its endpoints
    for (int k = 0; k <= 2000; ++k) {
      const Vec2 q = v[i] + (k / 2000.0) * (v[i + 1] - v[i]);
      best = std::min(best, norm(p - q));
    }
  }
  return best;
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Utm, CentralMeridianOnTheEquator) {
  const UtmPoint u = latlon_to_utm({0.0, 129.0});
  EXPECT_EQ(u.zone.number, 52);
  EXPECT_TRUE(u.zone.north);
  EXPECT_NEAR(u.easting, 500000.0, 0.01);
  EXPECT_NEAR(u.northing, 0.0, 0.01);
}

TEST(Utm, AgreesWithSnyderSeries) {
  const GeoPoint p{35.6524837116667, 128.397828661667};
  const UtmPoint u = latlon_to_utm(p);
  EXPECT_EQ(u.zone.number, 52);
  const auto [e, n] = snyder_utm(p.lat, p.lon, 129.0);
  EXPECT_NEAR(u.easting, e, 0.01);
  EXPECT_NEAR(u.northing, n, 0.01);
  const UtmPoint again = latlon_to_utm(p);
  EXPECT_EQ(again.easting, u.easting);
  EXPECT_EQ(again.northing, u.northing);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> lat(-70.0, 70.0), dl(-2.9, 2.9);
  for (int i = 0; i < 200; ++i) {
    const double la = lat(rng), lo = 129.0 + dl(rng);
    const UtmPoint v = latlon_to_utm({la, lo}, 52);
    const auto [se, sn] = snyder_utm(la, lo, 129.0);
    EXPECT_NEAR(v.easting, se, 0.05) << la << "," << lo;
    EXPECT_NEAR(v.northing - (la < 0 ? 1e7 : 0.0), sn, 0.05) << la << "," << lo;
  }
}

TEST(Utm, InverseRoundTrip) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> lat(0.0, 80.0), lon(-180.0, 180.0);
  for (int i = 0; i < 500; ++i) {
    const GeoPoint p{lat(rng), lon(rng)};
    const UtmPoint u = latlon_to_utm(p);
    const auto [la, lo] = inverse_utm(u.easting, u.northing, u.zone.number);
    EXPECT_NEAR(la, p.lat, 1e-6);
    EXPECT_NEAR(std::remainder(lo - p.lon, 360.0), 0.0, 1e-6);
  }
}

TEST(Utm, ZonesAndErrors) {
  EXPECT_EQ(utm_zone_for(-180.0), 1);
  EXPECT_EQ(utm_zone_for(179.999), 60);
  EXPECT_EQ(utm_zone_for(180.0), 1);
  EXPECT_EQ(utm_zone_for(128.4), 52);
  EXPECT_FALSE(latlon_to_utm({-33.0, 151.0}).zone.north);
  EXPECT_GT(latlon_to_utm({-33.0, 151.0}).northing, 6e6);
  EXPECT_THROW(latlon_to_utm({84.5, 0.0}), ValidationError);
  EXPECT_THROW(latlon_to_utm({-85.0, 0.0}), ValidationError);
  EXPECT_THROW(latlon_to_utm({std::nan(""), 0.0}), ValidationError);
  EXPECT_THROW(latlon_to_utm({10.0, 0.0}, 61), ValidationError);
  // forcing the neighbouring zone moves the easting off-centre but keeps it finite
  EXPECT_LT(latlon_to_utm({35.0, 129.0}, 51).easting, latlon_to_utm({35.0, 129.0}, 52).easting + 1e6);
}

TEST(Polyline, OnLineLeftOfLineAndPastTheEnd) {
  const Centerline c({{0, 0}, {10, 0}, {10, 10}});
  auto pr = nearest_on_polyline({4, 0}, c);
  EXPECT_DOUBLE_EQ(pr.offset, 0.0);
  EXPECT_EQ(pr.foot, (Vec2{4, 0}));
  pr = nearest_on_polyline({4, 1}, c);
  EXPECT_DOUBLE_EQ(pr.offset, 1.0);
  EXPECT_DOUBLE_EQ(pr.s, 4.0);
  pr = nearest_on_polyline({4, -1}, c);
  EXPECT_DOUBLE_EQ(pr.offset, -1.0);
  pr = nearest_on_polyline({10, 13}, c);
  EXPECT_DOUBLE_EQ(pr.s, 20.0);
  EXPECT_EQ(pr.foot, (Vec2{10, 10}));
  EXPECT_DOUBLE_EQ(std::abs(pr.offset), 3.0);
  pr = nearest_on_polyline({-2, 0}, c);
  EXPECT_DOUBLE_EQ(pr.s, 0.0);
}

TEST(Polyline, TiesKeepTheSmallerArclength) {
  const Centerline c({{0, 0}, {10, 0}, {10, 10}});
  // equidistant (1 m) from both legs
  const auto pr = nearest_on_polyline({9, 1}, c);
  EXPECT_DOUBLE_EQ(pr.s, 9.0);
}

TEST(Polyline, OffsetMagnitudeIsTheDistance) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::vector<Vec2> pts = {{0, 0}};
  for (int i = 0; i < 8; ++i) pts.push_back(pts.back() + Vec2{3.0 + std::abs(u(rng)) / 4, u(rng) / 4});
  const Centerline c(pts);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p{u(rng) + 15, u(rng)};
    const auto pr = nearest_on_polyline(p, c);
    EXPECT_NEAR(std::abs(pr.offset), norm(p - pr.foot), 1e-12);
    EXPECT_NEAR(std::abs(pr.offset), brute_distance(p, c), 1e-2);
    EXPECT_LE(std::abs(pr.offset), brute_distance(p, c) + 1e-12);
  }
}

TEST(Centerline, RejectsDegenerateInput) {
  EXPECT_THROW(Centerline({{0, 0}}), ValidationError);
  EXPECT_THROW(Centerline({{0, 0}, {0, 0}, {1, 0}}), ValidationError);
}

TEST(Offsets, ConstantShiftAndSineWeave) {
  const Centerline c = straight_x(200.0);
  std::vector<Vec2> on, shifted, weave;
  for (int i = 0; i <= 1900; ++i) {
    const double x = 0.1 * i;
    on.push_back({x, 0.0});
    shifted.push_back({x, 0.5});
    weave.push_back({x, std::sin(2 * std::numbers::pi * x / 23.0)});
  }
  for (const auto& o : lateral_offsets(along(on), c)) EXPECT_DOUBLE_EQ(o.offset, 0.0);
  for (const auto& o : lateral_offsets(along(shifted), c)) EXPECT_DOUBLE_EQ(o.offset, 0.5);
  double mx = 0.0;
  for (const auto& o : lateral_offsets(along(weave), c)) mx = std::max(mx, std::abs(o.offset));
  EXPECT_NEAR(mx, 1.0, 0.02);
}

TEST(SectionRmse, ZeroAndEastingOffset) {
  std::vector<Vec2> cl, tr, east;
  for (int i = 0; i <= 100; ++i) {
    cl.push_back({300000.0, 4000000.0 + i});
    east.push_back({300001.0, 4000000.0 + i});
  }
  const Centerline c(cl);
  const auto r0 = section_rmse(along(cl), c, {"all", 0.0, 100.0});
  EXPECT_DOUBLE_EQ(r0.rmse_x, 0.0);
  EXPECT_DOUBLE_EQ(r0.rmse_y, 0.0);
  EXPECT_EQ(r0.n, 101u);
  const auto r1 = section_rmse(along(east), c, {"all", 0.0, 100.0});
  EXPECT_NEAR(r1.rmse_x, 1.0, 1e-9);
  EXPECT_NEAR(r1.rmse_y, 0.0, 1e-9);
  const auto half = section_rmse(along(east), c, {"half", 0.0, 50.0});
  EXPECT_EQ(half.n, 51u);
}

TEST(SectionRmse, HandComputedMixedResiduals) {
  const Centerline c({{0, 0}, {10, 0}, {10, 10}});
  // feet: (2,0) dy=1; (5,0) dy=-2; (10,5) dx=+3 (right of the upward leg)
  const Trajectory t = along({{2, 1}, {5, -2}, {13, 5}});
  const auto r = section_rmse(t, c, {"s", 0.0, 20.0});
  EXPECT_NEAR(r.rmse_x, std::sqrt(9.0 / 3), 1e-12);
  EXPECT_NEAR(r.rmse_y, std::sqrt(5.0 / 3), 1e-12);
}

TEST(SectionRmse, TranslationInvariant) {
  std::vector<Vec2> cl, tr;
  for (int i = 0; i <= 60; ++i) {
    const double a = i * 0.02;
    cl.push_back({50 * std::cos(a), 50 * std::sin(a)});
    tr.push_back({(50 + 0.3 * std::sin(i)) * std::cos(a + 0.001), (50 + 0.3 * std::sin(i)) * std::sin(a + 0.001)});
  }
  const SectionSpec sec{"arc", 5.0, 50.0};
  const auto r = section_rmse(along(tr), Centerline(cl), sec);
  const Vec2 shift{512345.678, 4012345.25};
  for (auto& p : cl) p = p + shift;
  for (auto& p : tr) p = p + shift;
  const auto q = section_rmse(along(tr), Centerline(cl), sec);
  EXPECT_EQ(r.n, q.n);
  EXPECT_NEAR(r.rmse_x, q.rmse_x, 1e-9);
  EXPECT_NEAR(r.rmse_y, q.rmse_y, 1e-9);
}

TEST(SectionRmse, Errors) {
  const Centerline c = straight_x(100.0);
  const Trajectory t = along({{1, 0}, {2, 0}});
  EXPECT_THROW(section_rmse(t, c, {"far", 50.0, 60.0}), ValidationError);
  EXPECT_THROW(section_rmse(t, c, {"bad", 10.0, 5.0}), ValidationError);
  EXPECT_THROW(section_rmse(t, c, {"long", 0.0, 101.0}), ValidationError);
  Trajectory z = t;
  z.zone = UtmZone{52, true};
  const Centerline cz({{0, 0}, {100, 0}}, UtmZone{51, true});
  EXPECT_THROW(section_rmse(z, cz, {"all", 0.0, 100.0}), ValidationError);
}

TEST(Restoring, TruthTable) {
  auto v = restoring_verdict(series(60, 0.1, [](double) { return 0.0; }));
  EXPECT_TRUE(v.success);
  EXPECT_EQ(v.return_time, 0.0);

  v = restoring_verdict(series(130, 0.1, [](double t) { return 0.5 + 0.01 * std::sin(t); }));
  EXPECT_FALSE(v.success);
  EXPECT_EQ(v.reason, "never returned");

  v = restoring_verdict(series(140, 0.5, [](double t) { return t <= 110 ? 1.2 - t / 110.0 : 0.2 * std::exp(-(t - 110)); }));
  EXPECT_TRUE(v.success);
  ASSERT_TRUE(v.return_time);
  EXPECT_DOUBLE_EQ(*v.return_time, 110.0);

  // returns at 125 s: too late
  v = restoring_verdict(series(150, 0.5, [](double t) { return t < 125 ? 1.0 : 0.0; }));
  EXPECT_FALSE(v.success);
  EXPECT_EQ(v.reason, "never returned");

  // touches the band, then swings out within the window
  v = restoring_verdict(series(60, 0.1, [](double t) { return 0.6 * std::cos(0.5 * t); }));
  EXPECT_FALSE(v.success);
  EXPECT_EQ(v.reason, "unstable");

  v = restoring_verdict(series(5, 0.1, [](double) { return 0.0; }));
  EXPECT_FALSE(v.success);
  EXPECT_EQ(v.reason, "insufficient data");

  EXPECT_TRUE(restoring_verdict(series(30, 0.1, [](double t) { return t < 3 ? -0.9 : 0.05; })).success);
  EXPECT_THROW(restoring_verdict({{1.0, 0, 0}, {1.0, 0, 0}}), ValidationError);
}

TEST(Restoring, LooserSpecNeverFlipsSuccessToFail) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int successes = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const double a = 2 * u(rng) - 1, k = 0.02 + 0.3 * u(rng), wob = 0.3 * u(rng), w = 0.2 + 2 * u(rng);
    const auto s = series(150, 0.5, [&](double t) { return a * std::exp(-k * t) + wob * std::sin(w * t); });
    const RestoreSpec base{0.1 + 0.3 * u(rng), 20 + 100 * u(rng), 10.0, 0.3};
    if (!restoring_verdict(s, base).success) continue;
    ++successes;
    RestoreSpec wider = base;
    wider.return_band += 0.2 * u(rng);
    EXPECT_TRUE(restoring_verdict(s, wider).success);
    RestoreSpec later = base;
    later.t_max += 30 * u(rng);
    EXPECT_TRUE(restoring_verdict(s, later).success);
  }
  EXPECT_GT(successes, 20);
}

TEST(SuccessRate, Examples) {
  EXPECT_DOUBLE_EQ(success_rate({true, true, true}), 100.0);
  EXPECT_DOUBLE_EQ(success_rate({true, true, true, true, true, false, false}), 71.4);
  EXPECT_DOUBLE_EQ(success_rate({false}), 0.0);
  EXPECT_DOUBLE_EQ(success_rate({true, false, false}), 33.3);
  EXPECT_THROW(success_rate({}), ValidationError);
}

TEST(TrajectoryIo, PlanarRoundTrip) {
  TempDir dir;
  Trajectory t = along({{0.5, 1.25}, {1.5, 1.75}, {2.5, 2.0}});
  write_trajectory(dir / "run.csv", t);
  const Trajectory back = read_trajectory(dir / "run.csv");
  EXPECT_EQ(back.label, "run");
  ASSERT_EQ(back.samples.size(), 3u);
  EXPECT_DOUBLE_EQ(back.samples[2].p.x, 2.5);
  EXPECT_NEAR(back.samples[1].t, 0.1, 1e-6);
  const Centerline c({{0, 0}, {3, 0}, {3, 4}});
  write_centerline(dir / "c.csv", c);
  EXPECT_EQ(read_centerline(dir / "c.csv").points(), c.points());
}

TEST(TrajectoryIo, GeographicInputIsProjected) {
  TempDir dir;
  write_text(dir / "g.csv", "t,lat,lon\n0,35.6524837116667,128.397828661667\n1,35.6524937116667,128.397828661667\n");
  const Trajectory t = read_trajectory(dir / "g.csv");
  ASSERT_TRUE(t.zone);
  EXPECT_EQ(t.zone->number, 52);
  const UtmPoint u = latlon_to_utm({35.6524837116667, 128.397828661667});
  EXPECT_EQ(t.samples[0].p.x, u.easting);
  EXPECT_NEAR(t.samples[1].p.y - t.samples[0].p.y, 1.11, 0.01);
}

TEST(TrajectoryIo, GuardsAndMalformedFiles) {
  TempDir dir;
  write_text(dir / "jump.csv", "t,x,y\n0,0,0\n1,1,0\n2,11.5,0\n");
  try {
    read_trajectory(dir / "jump.csv");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("discontinuity"), std::string::npos);
  }
  write_text(dir / "time.csv", "t,x,y\n0,0,0\n0,1,0\n");
  EXPECT_THROW(read_trajectory(dir / "time.csv"), ValidationError);
  write_text(dir / "hdr.csv", "time,x,y\n0,0,0\n");
  EXPECT_THROW(read_trajectory(dir / "hdr.csv"), ValidationError);
  write_text(dir / "num.csv", "t,x,y\n0,abc,0\n");
  EXPECT_THROW(read_trajectory(dir / "num.csv"), ValidationError);
  write_text(dir / "cols.csv", "t,x,y\n0,1\n");
  EXPECT_THROW(read_trajectory(dir / "cols.csv"), ValidationError);
  EXPECT_THROW(read_trajectory(dir / "none.csv"), ValidationError);
}
