#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/traj/trajectory.hpp"
#include "s2r/traj/utm.hpp"

// Comma-separated trajectory files. Header "t,lat,lon" (degrees, projected
// to UTM on load) or "t,x,y" (planar metres). Centerlines use the same
// layout without the t column.
namespace s2r::traj {

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("bad number '" + s + "' at " + where);
  }
}

struct PlanarRows {
  bool geographic = false;
  std::vector<std::vector<double>> rows;
};

inline PlanarRows read_rows(const std::filesystem::path& path, bool timed) {
  std::ifstream in(path);
  if (!in) throw ValidationError("unreadable file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty file: " + path.string());
  const auto header = split_csv(line);
  const std::vector<std::string> geo = timed ? std::vector<std::string>{"t", "lat", "lon"}
                                             : std::vector<std::string>{"lat", "lon"};
  const std::vector<std::string> planar = timed ? std::vector<std::string>{"t", "x", "y"}
                                                : std::vector<std::string>{"x", "y"};
  PlanarRows out;
  if (header == geo) {
    out.geographic = true;
  } else if (header != planar) {
    throw ValidationError("unexpected header in " + path.string() + ": '" + line + "'");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " columns");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number(c, path.string() + ":" + std::to_string(lineno)));
    out.rows.push_back(std::move(row));
  }
  return out;
}

// Projects lat/lon columns; the first row fixes the zone unless forced.
inline std::vector<Vec2> to_planar(const PlanarRows& rows, std::size_t col, std::optional<int> forced_zone,
                                   std::optional<UtmZone>& zone) {
  std::vector<Vec2> pts;
  for (const auto& r : rows.rows) {
    if (rows.geographic) {
      const auto u = latlon_to_utm({r[col], r[col + 1]}, forced_zone ? forced_zone : (zone ? std::optional<int>(zone->number) : std::nullopt));
      if (!zone) zone = u.zone;
      pts.push_back({u.easting, u.northing});
    } else {
      pts.push_back({r[col], r[col + 1]});
    }
  }
  return pts;
}

}  // namespace detail

/// `planar_zone` tags planar input with a zone (for zone-consistency checks).
inline Trajectory read_trajectory(const std::filesystem::path& path, std::optional<int> forced_zone = std::nullopt,
                                  std::optional<UtmZone> planar_zone = std::nullopt) {
  const auto rows = detail::read_rows(path, true);
  Trajectory t;
  t.label = path.stem().string();
  if (!rows.geographic) t.zone = planar_zone;
  const auto pts = detail::to_planar(rows, 1, forced_zone, t.zone);
  for (std::size_t i = 0; i < pts.size(); ++i) t.samples.push_back({rows.rows[i][0], pts[i]});
  t.validate();
  return t;
}

inline Centerline read_centerline(const std::filesystem::path& path, std::optional<int> forced_zone = std::nullopt,
                                  std::optional<UtmZone> planar_zone = std::nullopt) {
  const auto rows = detail::read_rows(path, false);
  std::optional<UtmZone> zone = rows.geographic ? std::nullopt : planar_zone;
  auto pts = detail::to_planar(rows, 0, forced_zone, zone);
  return Centerline(std::move(pts), zone);
}

inline std::string format_fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline void write_trajectory(const std::filesystem::path& path, const Trajectory& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("unwritable output path: " + path.string());
  out << "t,x,y\n";
  for (const auto& s : t.samples) out << format_fixed(s.t) << ',' << format_fixed(s.p.x) << ',' << format_fixed(s.p.y) << '\n';
}

inline void write_centerline(const std::filesystem::path& path, const Centerline& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("unwritable output path: " + path.string());
  out << "x,y\n";
  for (const auto& p : c.points()) out << format_fixed(p.x) << ',' << format_fixed(p.y) << '\n';
}

}  // namespace s2r::traj
