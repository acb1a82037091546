#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "s2r/core/error.hpp"

namespace s2r::traj {

struct GeoPoint {
  double lat = 0.0;  // degrees, WGS84
  double lon = 0.0;
};

struct UtmZone {
  int number = 0;
  bool north = true;
  friend bool operator==(const UtmZone&, const UtmZone&) = default;
};

struct UtmPoint {
  double easting = 0.0;
  double northing = 0.0;
  UtmZone zone;
};

namespace wgs84 {
inline constexpr double kA = 6378137.0;
inline constexpr double kF = 1.0 / 298.257223563;
}  // namespace wgs84

inline constexpr double kUtmScale = 0.9996;
inline constexpr double kFalseEasting = 500000.0;
inline constexpr double kFalseNorthingSouth = 10000000.0;
inline constexpr double kMaxUtmLat = 84.0;

inline int utm_zone_for(double lon) {
  double l = std::fmod(lon + 180.0, 360.0);
  if (l < 0) l += 360.0;
  return std::min(60, static_cast<int>(std::floor(l / 6.0)) + 1);
}

inline double central_meridian(int zone) { return -183.0 + 6.0 * zone; }

/// Transverse Mercator via the Kruger series in the third flattening n,
/// carried to n^6 (sub-millimetre inside a zone).
inline UtmPoint latlon_to_utm(const GeoPoint& p, std::optional<int> forced_zone = std::nullopt) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon)) throw ValidationError("non-finite coordinates");
  if (std::abs(p.lat) > kMaxUtmLat) {
    throw ValidationError("latitude " + std::to_string(p.lat) + " outside UTM range (|lat| <= 84)");
  }
  const int zone = forced_zone.value_or(utm_zone_for(p.lon));
  require(zone >= 1 && zone <= 60, "UTM zone must be in [1, 60]");

  constexpr double n = wgs84::kF / (2.0 - wgs84::kF);
  constexpr double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
  constexpr double rect = wgs84::kA / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
  constexpr std::array<double, 6> alpha = {
      n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 - 127.0 * n5 / 288.0 + 7891.0 * n6 / 37800.0,
      13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 + 281.0 * n5 / 630.0 - 1983433.0 * n6 / 1935360.0,
      61.0 * n3 / 240.0 - 103.0 * n4 / 140.0 + 15061.0 * n5 / 26880.0 + 167603.0 * n6 / 181440.0,
      49561.0 * n4 / 161280.0 - 179.0 * n5 / 168.0 + 6601661.0 * n6 / 7257600.0,
      34729.0 * n5 / 80640.0 - 3418889.0 * n6 / 1995840.0,
      212378941.0 * n6 / 319334400.0};
  const double ecc = 2.0 * std::sqrt(n) / (1.0 + n);

  constexpr double deg = std::numbers::pi / 180.0;
  const double phi = p.lat * deg;
  double dlon = p.lon - central_meridian(zone);
  dlon = std::remainder(dlon, 360.0);
  const double lam = dlon * deg;

  const double t = std::sinh(std::atanh(std::sin(phi)) - ecc * std::atanh(ecc * std::sin(phi)));
  const double xi_p = std::atan2(t, std::cos(lam));
  const double eta_p = std::atanh(std::sin(lam) / std::sqrt(1.0 + t * t));

  double xi = xi_p, eta = eta_p;
  for (int j = 1; j <= 6; ++j) {
    xi += alpha[j - 1] * std::sin(2.0 * j * xi_p) * std::cosh(2.0 * j * eta_p);
    eta += alpha[j - 1] * std::cos(2.0 * j * xi_p) * std::sinh(2.0 * j * eta_p);
  }
  UtmPoint out;
  out.zone = {zone, p.lat >= 0.0};
  out.easting = kFalseEasting + kUtmScale * rect * eta;
  out.northing = (out.zone.north ? 0.0 : kFalseNorthingSouth) + kUtmScale * rect * xi;
  return out;
}

}  // namespace s2r::traj
