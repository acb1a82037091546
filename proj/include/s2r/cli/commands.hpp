#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "s2r/cli/config.hpp"
#include "s2r/core/image_io.hpp"
#include "s2r/core/image_set.hpp"
#include "s2r/fid/feature_file.hpp"
#include "s2r/fid/features.hpp"
#include "s2r/fid/frechet.hpp"
#include "s2r/fsim/fsim.hpp"
#include "s2r/lane/accuracy.hpp"
#include "s2r/lane/ground_truth.hpp"
#include "s2r/lane/tusimple_io.hpp"
#include "s2r/sim/dataset.hpp"
#include "s2r/sim/episode.hpp"
#include "s2r/traj/io.hpp"
#include "s2r/traj/metrics.hpp"

namespace s2r::cli {

namespace fs = std::filesystem;

struct Context {
  int threads = 1;
};

struct Command {
  std::string name;
  std::string summary;
  std::vector<Key> keys;
  std::function<json(const json& cfg, const Context& ctx)> run;
  std::function<std::string(const json& result)> csv;  // empty: no tabular form
};

namespace detail {

inline std::vector<std::string> strings(const json& v) { return v.get<std::vector<std::string>>(); }

inline std::pair<std::string, std::string> split_pair(const std::string& s, char sep, const std::string& what) {
  const auto pos = s.find(sep);
  if (pos == std::string::npos || pos == 0 || pos + 1 == s.size()) {
    throw ValidationError(what + " entry '" + s + "' must look like name" + sep + "value");
  }
  return {s.substr(0, pos), s.substr(pos + 1)};
}

inline double to_number(const std::string& s, const std::string& what) {
  const auto v = parse_double(s);
  if (!v) throw ValidationError(what + ": '" + s + "' is not a number");
  return *v;
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

/// CSV cell: quoted only when needed.
inline std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return format_g6(v.get<double>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}

inline std::string csv_row(std::initializer_list<json> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += cell(c);
    first = false;
  }
  return out + "\n";
}

// ---- shared key groups ----

inline std::vector<Key> fid_keys() {
  return {
      {"d", Kind::kInt, 64, "feature dimensionality of the built-in extractor (1..1024)", checks::range(1, 1024)},
      {"seed", Kind::kInt, 1, "projection seed of the built-in extractor", checks::nonnegative()},
      {"glob", Kind::kString, "*.png", "filename pattern inside image directories", checks::nonempty()},
  };
}

inline std::vector<Key> fsim_keys() {
  return {
      {"roi", Kind::kNumberList, json::array(),
       "crop x0,y0,width,height; empty = full width, 245 rows ending 130 above the bottom", {}},
      {"t1", Kind::kNumber, 0.85, "phase congruency similarity constant", checks::positive()},
      {"t2", Kind::kNumber, 160.0, "gradient similarity constant", checks::positive()},
      {"scales", Kind::kInt, 4, "log-Gabor scales", checks::range(1, 16)},
      {"orientations", Kind::kInt, 4, "log-Gabor orientations", checks::range(1, 32)},
      {"min_wavelength", Kind::kNumber, 6.0, "wavelength of the smallest filter, px", checks::positive()},
      {"scale_mult", Kind::kNumber, 2.0, "wavelength ratio between scales", checks::positive()},
      {"sigma_on_f", Kind::kNumber, 0.55, "log-Gabor bandwidth ratio", checks::positive()},
      {"noise_k", Kind::kNumber, 2.0, "noise threshold in standard deviations", checks::nonnegative()},
      {"glob", Kind::kString, "*.png", "filename pattern inside image directories", checks::nonempty()},
  };
}

inline fsim::FsimParams fsim_params(const json& c) {
  fsim::FsimParams p;
  p.t1 = c["t1"];
  p.t2 = c["t2"];
  p.scales = c["scales"];
  p.orientations = c["orientations"];
  p.min_wavelength = c["min_wavelength"];
  p.scale_mult = c["scale_mult"];
  p.sigma_on_f = c["sigma_on_f"];
  p.noise_k = c["noise_k"];
  p.validate();
  return p;
}

inline Roi fsim_roi(const json& c, int width, int height) {
  const auto v = c["roi"].get<std::vector<double>>();
  if (v.empty()) return fsim::default_fsim_roi(width, height);
  require(v.size() == 4, "roi needs exactly 4 values x0,y0,width,height");
  for (double x : v) require(x >= 0 && x == std::floor(x), "roi values must be nonnegative integers");
  const Roi r{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
  require(r.width > 0 && r.height > 0 && r.x0 + r.width <= width && r.y0 + r.height <= height,
          "roi out of bounds for " + std::to_string(width) + "x" + std::to_string(height) + " images");
  return r;
}

inline json roi_json(const Roi& r) { return json{{"x0", r.x0}, {"y0", r.y0}, {"width", r.width}, {"height", r.height}}; }

inline std::vector<Key> scene_keys() {
  return {
      {"road_width", Kind::kNumber, 3.5, "lane width, m", checks::positive()},
      {"line_length", Kind::kNumber, 4.5, "dash length, m", checks::positive()},
      {"line_spacing", Kind::kNumber, 4.0, "gap between dashes, m", checks::positive()},
      {"line_width", Kind::kNumber, 0.125, "marking width, m", checks::positive()},
      {"lane_count", Kind::kInt, 3, "number of lanes", checks::range(2, 8)},
      {"texture_sharpness", Kind::kNumber, 1.0, "marking contrast, 1 = crisp", checks::range(0, 1)},
      {"connected_lines", Kind::kBool, false, "solid instead of dashed separators", {}},
  };
}

inline sim::SceneSpec scene_from(const json& c) {
  sim::SceneSpec s;
  s.road_width = c["road_width"];
  s.line_length = c["line_length"];
  s.line_spacing = c["line_spacing"];
  s.line_width = c["line_width"];
  s.lane_count = c["lane_count"];
  s.texture_sharpness = c["texture_sharpness"];
  s.connected_lines = c["connected_lines"];
  s.validate();
  return s;
}

inline std::vector<Key> camera_keys() {
  return {
      {"h_fov", Kind::kNumber, 76.0, "horizontal field of view, degrees", checks::range(1, 179)},
      {"width", Kind::kInt, 808, "image width, px", checks::range(16, 8192)},
      {"height", Kind::kInt, 620, "image height, px", checks::range(16, 8192)},
      {"mount_height", Kind::kNumber, 1.4, "camera height above ground, m", checks::positive()},
      {"pitch", Kind::kNumber, -4.0, "camera pitch, degrees (negative looks down)", checks::range(-89, 0)},
      {"gamma", Kind::kNumber, 0.8, "output gamma", checks::positive()},
  };
}

inline sim::CameraSpec camera_from(const json& c) {
  sim::CameraSpec cam;
  cam.h_fov_deg = c["h_fov"];
  cam.width = c["width"];
  cam.height = c["height"];
  cam.mount_height = c["mount_height"];
  cam.pitch_deg = c["pitch"];
  cam.gamma = c["gamma"];
  cam.validate();
  return cam;
}

inline std::vector<Key> track_keys(const std::string& default_track) {
  return {
      {"track", Kind::kString, default_track, "track preset: curve, straight or oval",
       checks::one_of({"curve", "straight", "oval"})},
      {"arc_radius", Kind::kNumber, 150.0, "arc radius of the curve and oval presets, m", checks::positive()},
      {"arc_angle", Kind::kNumber, 45.0, "arc sweep of the curve preset, degrees (positive = left)", {}},
      {"lead", Kind::kNumber, 60.0, "straight before the arc of the curve preset, m", checks::positive()},
      {"tail", Kind::kNumber, 60.0, "straight after the arc of the curve preset, m", checks::positive()},
      {"straight_length", Kind::kNumber, 200.0, "length of the straight preset and the oval straights, m",
       checks::positive()},
      {"segments", Kind::kStringList, json::array(),
       "explicit track, overrides the preset: straight:LEN and arc:RADIUS:DEG entries", {}},
      {"closed", Kind::kBool, false, "explicit track is a closed loop", {}},
  };
}

inline sim::TrackSpec track_from(const json& c) {
  const auto segs = strings(c["segments"]);
  if (!segs.empty()) {
    sim::TrackSpec t;
    t.closed = c["closed"];
    for (const auto& s : segs) {
      const auto parts = split_on(s, ':');
      if (parts.size() == 2 && parts[0] == "straight") {
        t.segments.push_back(sim::Straight{to_number(parts[1], "segment " + s)});
      } else if (parts.size() == 3 && parts[0] == "arc") {
        t.segments.push_back(sim::Arc{to_number(parts[1], "segment " + s), to_number(parts[2], "segment " + s)});
      } else {
        throw ValidationError("segment '" + s + "' must be straight:LEN or arc:RADIUS:DEG");
      }
    }
    return t;
  }
  const std::string kind = c["track"];
  if (kind == "straight") return sim::straight_track(c["straight_length"]);
  if (kind == "oval") return sim::oval_track(c["straight_length"], c["arc_radius"]);
  return sim::curve_track(c["arc_radius"], c["arc_angle"], c["lead"], c["tail"]);
}

inline std::vector<Key> style_keys(const std::string& default_style) {
  return {
      {"style", Kind::kString, default_style, "degradation preset: crisp or soft", checks::one_of({"crisp", "soft"})},
      {"blur_sigma", Kind::kNumber, nullptr, "override the preset blur sigma, px", checks::nonnegative()},
      {"contrast", Kind::kNumber, nullptr, "override the preset contrast", checks::nonnegative()},
      {"noise_sigma", Kind::kNumber, nullptr, "override the preset noise sigma, 8-bit levels", checks::nonnegative()},
  };
}

inline sim::StylePreset style_from(const json& c) {
  sim::StylePreset s = sim::StylePreset::by_name(c["style"]);
  bool custom = false;
  if (!c["blur_sigma"].is_null()) s.blur_sigma = c["blur_sigma"], custom = true;
  if (!c["contrast"].is_null()) s.contrast = c["contrast"], custom = true;
  if (!c["noise_sigma"].is_null()) s.noise_sigma = c["noise_sigma"], custom = true;
  if (custom) s.name += "+custom";
  s.validate();
  return s;
}

inline json scene_json(const sim::SceneSpec& s) {
  return json{{"road_width", s.road_width},   {"line_length", s.line_length},
              {"line_spacing", s.line_spacing}, {"line_width", s.line_width},
              {"lane_count", s.lane_count},   {"texture_sharpness", s.texture_sharpness},
              {"connected_lines", s.connected_lines}};
}

inline std::vector<Key> trajectory_input_keys() {
  return {
      {"trajectories", Kind::kStringList, json::array(), "trajectory files (t,lat,lon or t,x,y)", checks::nonempty()},
      {"centerline", Kind::kString, "", "centerline file (lat,lon or x,y)", checks::nonempty()},
      {"zone", Kind::kInt, nullptr, "UTM zone: forced for lat/lon input, tag for planar input", checks::range(1, 60)},
      {"south", Kind::kBool, false, "the zone is in the southern hemisphere", {}},
  };
}

struct TrajectoryInputs {
  std::vector<traj::Trajectory> runs;
  traj::Centerline centerline;
};

inline TrajectoryInputs load_trajectories(const json& c) {
  std::optional<int> forced;
  std::optional<traj::UtmZone> planar;
  if (!c["zone"].is_null()) {
    forced = c["zone"].get<int>();
    planar = traj::UtmZone{*forced, !c["south"].get<bool>()};
  }
  TrajectoryInputs in;
  in.centerline = traj::read_centerline(c["centerline"].get<std::string>(), forced, planar);
  for (const auto& p : strings(c["trajectories"])) in.runs.push_back(traj::read_trajectory(p, forced, planar));
  return in;
}

inline std::vector<traj::SectionSpec> parse_sections(const json& v) {
  std::vector<traj::SectionSpec> out;
  for (const auto& s : strings(v)) {
    const auto parts = split_on(s, ':');
    if (parts.size() != 3 || parts[0].empty()) throw ValidationError("section '" + s + "' must be NAME:START:END");
    out.push_back({parts[0], to_number(parts[1], "section " + s), to_number(parts[2], "section " + s)});
  }
  return out;
}

/// Section RMSE as a report object; sections without samples report n = 0.
inline json section_json(const traj::Trajectory& t, const traj::Centerline& c, const traj::SectionSpec& sec) {
  sec.validate(c.length());
  bool any = false;
  for (const auto& smp : t.samples) {
    const double s = traj::nearest_on_polyline(smp.p, c).s;
    if (s >= sec.start_s && s <= sec.end_s) {
      any = true;
      break;
    }
  }
  if (!any) return json{{"name", sec.name}, {"rmse_x", nullptr}, {"rmse_y", nullptr}, {"rmse", nullptr}, {"n", 0}};
  const auto r = traj::section_rmse(t, c, sec);
  return json{{"name", sec.name},
              {"rmse_x", r.rmse_x},
              {"rmse_y", r.rmse_y},
              {"rmse", std::hypot(r.rmse_x, r.rmse_y)},
              {"n", r.n}};
}

/// Per-section means over runs, skipping runs that never reached a section.
inline json section_summary(const std::vector<traj::SectionSpec>& secs, const std::vector<json>& per_run) {
  json out = json::array();
  for (std::size_t k = 0; k < secs.size(); ++k) {
    double sx = 0, sy = 0, sr = 0;
    int n = 0;
    for (const auto& run : per_run) {
      const auto& e = run[k];
      if (e["n"].get<long>() == 0) continue;
      sx += e["rmse_x"].get<double>();
      sy += e["rmse_y"].get<double>();
      sr += e["rmse"].get<double>();
      ++n;
    }
    json row{{"name", secs[k].name}, {"runs", n}};
    row["mean_rmse_x"] = n ? json(sx / n) : json(nullptr);
    row["mean_rmse_y"] = n ? json(sy / n) : json(nullptr);
    row["mean_rmse"] = n ? json(sr / n) : json(nullptr);
    out.push_back(row);
  }
  return out;
}

inline std::vector<Key> restore_keys() {
  return {
      {"return_band", Kind::kNumber, 0.2, "offset counted as returned to the center, m", checks::positive()},
      {"t_max", Kind::kNumber, 120.0, "latest accepted return time, s", checks::positive()},
      {"stable_window", Kind::kNumber, 10.0, "time the vehicle must then stay near the center, s",
       checks::positive()},
      {"stable_band", Kind::kNumber, 0.3, "offset bound during the stable window, m", checks::positive()},
  };
}

inline traj::RestoreSpec restore_from(const json& c) {
  traj::RestoreSpec r;
  r.return_band = c["return_band"];
  r.t_max = c["t_max"];
  r.stable_window = c["stable_window"];
  r.stable_band = c["stable_band"];
  r.validate();
  return r;
}

inline json verdict_json(const traj::RestoreVerdict& v) {
  return json{{"success", v.success},
              {"return_time", v.return_time ? json(*v.return_time) : json(nullptr)},
              {"reason", v.reason}};
}

/// Image set from a directory, or features from an S2RF file.
inline fid::FeatureMatrix features_for(const std::string& path, const json& c, int threads) {
  if (fs::is_regular_file(path)) return fid::read_feature_file(path);
  if (!fs::is_directory(path)) throw ValidationError("input not found: " + path);
  const ImageSet set = load_image_set(path, c["glob"].get<std::string>(), threads);
  return fid::builtin_features(set, c["d"].get<int>(), c["seed"].get<std::uint64_t>(), threads);
}

inline std::vector<Key> concat(std::vector<Key> a, const std::vector<Key>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline std::string file_name(const fs::path& p) { return p.filename().string(); }

// ---- commands ----

inline Command fid_command() {
  Command c{"fid", "Frechet distance between two image directories or S2RF feature files", {}, {}, {}};
  c.keys = concat({{"a", Kind::kString, "", "first input: image directory or feature file", checks::nonempty()},
                   {"b", Kind::kString, "", "second input: image directory or feature file", checks::nonempty()}},
                  fid_keys());
  c.run = [](const json& cfg, const Context& ctx) {
    const auto fa = features_for(cfg["a"], cfg, ctx.threads);
    const auto fb = features_for(cfg["b"], cfg, ctx.threads);
    const auto r = fid::fid_between(fa, fb);
    return json{{"label_a", r.label_a}, {"label_b", r.label_b}, {"fid", r.value},       {"d", r.d},
                {"n_a", r.n_a},         {"n_b", r.n_b},         {"regularized", r.regularized}};
  };
  c.csv = [](const json& r) {
    return csv_row({"label_a", "label_b", "fid", "d", "n_a", "n_b", "regularized"}) +
           csv_row({r["label_a"], r["label_b"], r["fid"], r["d"], r["n_a"], r["n_b"], r["regularized"]});
  };
  return c;
}

inline Command fid_matrix_command() {
  Command c{"fid-matrix", "Pairwise FID over several image directories or feature files", {}, {}, {}};
  c.keys = concat({{"inputs", Kind::kStringList, json::array(), "image directories or feature files (2 or more)",
                    checks::nonempty()}},
                  fid_keys());
  c.run = [](const json& cfg, const Context& ctx) {
    const auto paths = strings(cfg["inputs"]);
    require(paths.size() >= 2, "fid-matrix needs at least 2 inputs");
    std::vector<fid::FeatureMatrix> feats;
    for (const auto& p : paths) feats.push_back(features_for(p, cfg, ctx.threads));
    const auto t = fid::fid_matrix(feats);
    json pairs = json::array();
    for (const auto& r : t.pairs) {
      pairs.push_back(json{{"label_a", r.label_a}, {"label_b", r.label_b}, {"fid", r.value},
                           {"regularized", r.regularized}});
    }
    json matrix = json::array();
    for (const auto& row : t.values) matrix.push_back(row);
    return json{{"labels", t.labels}, {"d", feats.front().d()}, {"matrix", matrix}, {"pairs", pairs}};
  };
  c.csv = [](const json& r) {
    std::string out = "label_a,label_b,fid,regularized\n";
    for (const auto& p : r["pairs"]) out += csv_row({p["label_a"], p["label_b"], p["fid"], p["regularized"]});
    return out;
  };
  return c;
}

inline Command fsim_command() {
  Command c{"fsim", "Mean FSIM between paired reference and generated image directories", {}, {}, {}};
  c.keys = concat({{"ref", Kind::kString, "", "reference image directory", checks::nonempty()},
                   {"gen", Kind::kString, "", "generated image directory", checks::nonempty()}},
                  fsim_keys());
  c.run = [](const json& cfg, const Context& ctx) {
    const auto p = fsim_params(cfg);
    const auto ref = load_image_set(cfg["ref"].get<std::string>(), cfg["glob"].get<std::string>(), ctx.threads);
    const auto gen = load_image_set(cfg["gen"].get<std::string>(), cfg["glob"].get<std::string>(), ctx.threads);
    const Roi roi = fsim_roi(cfg, ref.images.front().width(), ref.images.front().height());
    const auto m = fsim::mean_fsim(ref, gen, roi, p, ctx.threads);
    json pairs = json::array();
    for (std::size_t i = 0; i < m.scores.size(); ++i) {
      pairs.push_back(json{{"ref", file_name(ref.paths[i])}, {"gen", file_name(gen.paths[i])}, {"fsim", m.scores[i]}});
    }
    return json{{"roi", roi_json(roi)}, {"pairs_count", m.scores.size()}, {"mean_fsim", m.mean}, {"pairs", pairs}};
  };
  c.csv = [](const json& r) {
    std::string out = "ref,gen,fsim\n";
    for (const auto& p : r["pairs"]) out += csv_row({p["ref"], p["gen"], p["fsim"]});
    return out;
  };
  return c;
}

inline Command select_lambda_command() {
  Command c{"select-lambda", "Pick the hyperparameter candidate with the highest mean FSIM", {}, {}, {}};
  c.keys = concat(
      {{"scores", Kind::kStringList, json::array(), "precomputed candidates as ID=MEAN_FSIM", {}},
       {"candidates", Kind::kStringList, json::array(), "candidates as ID=DIRECTORY, scored against ref", {}},
       {"ref", Kind::kString, "", "reference image directory for directory candidates", {}}},
      fsim_keys());
  c.run = [](const json& cfg, const Context& ctx) {
    const auto scores = strings(cfg["scores"]);
    const auto dirs = strings(cfg["candidates"]);
    require(scores.empty() != dirs.empty(), "give exactly one of scores or candidates");
    std::vector<fsim::LambdaCandidate> cands;
    json roi = nullptr;
    if (!scores.empty()) {
      for (const auto& s : scores) {
        const auto [id, v] = split_pair(s, '=', "scores");
        cands.push_back({id, to_number(v, "score of candidate " + id)});
      }
    } else {
      require(!cfg["ref"].get<std::string>().empty(), "directory candidates need ref");
      const auto p = fsim_params(cfg);
      const auto glob = cfg["glob"].get<std::string>();
      const auto ref = load_image_set(cfg["ref"].get<std::string>(), glob, ctx.threads);
      const Roi r = fsim_roi(cfg, ref.images.front().width(), ref.images.front().height());
      roi = roi_json(r);
      for (const auto& s : dirs) {
        const auto [id, dir] = split_pair(s, '=', "candidates");
        const auto gen = load_image_set(dir, glob, ctx.threads);
        cands.push_back({id, fsim::mean_fsim(ref, gen, r, p, ctx.threads).mean});
      }
    }
    json list = json::array();
    for (const auto& cd : cands) list.push_back(json{{"lambda", cd.lambda_id}, {"mean_fsim", cd.mean_fsim}});
    return json{{"roi", roi}, {"candidates", list}, {"selected", fsim::select_lambda(cands)}};
  };
  c.csv = [](const json& r) {
    std::string out = "lambda,mean_fsim,selected\n";
    for (const auto& cd : r["candidates"]) out += csv_row({cd["lambda"], cd["mean_fsim"], cd["lambda"] == r["selected"]});
    return out;
  };
  return c;
}

inline Command extract_gt_command() {
  Command c{"extract-gt", "Lane ground truth from segmentation rasters, written as a TuSimple lane file", {}, {}, {}};
  c.keys = {
      {"input", Kind::kString, "", "directory of segmentation rasters", checks::nonempty()},
      {"glob", Kind::kString, "*.png", "filename pattern inside the directory", checks::nonempty()},
      {"output", Kind::kString, "", "lane file to write (JSON lines)", checks::nonempty()},
      {"lane_color", Kind::kNumberList, json::array({255, 255, 255}), "RGB of lane pixels", {}},
      {"h_start", Kind::kInt, 250, "first sample row", checks::nonnegative()},
      {"h_stop", Kind::kInt, 610, "last sample row (inclusive)", checks::nonnegative()},
      {"h_step", Kind::kInt, 10, "row step", checks::positive()},
      {"three_run_rule", Kind::kString, "pseudocode",
       "3-run rows: pseudocode = lines 1,2,3 when the middle run is left of center; prose = the opposite",
       checks::one_of({"pseudocode", "prose"})},
  };
  c.run = [](const json& cfg, const Context& ctx) {
    const auto color = cfg["lane_color"].get<std::vector<double>>();
    require(color.size() == 3, "lane_color needs 3 values");
    for (double v : color) require(v >= 0 && v <= 255 && v == std::floor(v), "lane_color values must be 0..255");
    const lane::Rgb rgb{static_cast<std::uint8_t>(color[0]), static_cast<std::uint8_t>(color[1]),
                        static_cast<std::uint8_t>(color[2])};
    const auto h = lane::make_h_samples(cfg["h_start"], cfg["h_stop"], cfg["h_step"]);
    const auto rule = cfg["three_run_rule"] == "prose" ? lane::ThreeRunRule::kProse : lane::ThreeRunRule::kPseudocode;
    const auto set = load_image_set(cfg["input"].get<std::string>(), cfg["glob"].get<std::string>(), ctx.threads);
    require(h.back() < set.images.front().height(), "h_samples exceed the raster height");
    std::vector<lane::LaneFrame> frames(set.size());
    std::vector<lane::ExtractionStats> stats(set.size());
    parallel_for(set.size(), ctx.threads, [&](std::size_t i) {
      require(set.images[i].channels() == 3, "segmentation raster must be RGB: " + set.paths[i].string());
      frames[i] = lane::extract_ground_truth({set.images[i], rgb}, h, rule, &stats[i]);
      frames[i].frame_id = file_name(set.paths[i]);
    });
    lane::write_lane_file(cfg["output"].get<std::string>(), frames);
    long two = 0, three = 0, four = 0, other = 0;
    for (const auto& s : stats) two += s.rows_two, three += s.rows_three, four += s.rows_four, other += s.rows_invalid;
    return json{{"frames", frames.size()},
                {"rows_two_runs", two},
                {"rows_three_runs", three},
                {"rows_four_runs", four},
                {"rows_other", other},
                {"output", cfg["output"]}};
  };
  return c;
}

inline Command lane_accuracy_command() {
  Command c{"lane-accuracy", "TuSimple point accuracy of predicted lanes against ground truth", {}, {}, {}};
  c.keys = {
      {"pred", Kind::kString, "", "predicted lane file (JSON lines)", checks::nonempty()},
      {"gt", Kind::kString, "", "ground-truth lane file (JSON lines)", checks::nonempty()},
      {"threshold", Kind::kNumber, 20.0, "pixel distance counted as a true point", checks::positive()},
  };
  c.run = [](const json& cfg, const Context&) {
    const auto preds = lane::read_lane_file(cfg["pred"].get<std::string>());
    const auto gts = lane::read_lane_file(cfg["gt"].get<std::string>());
    const auto r = lane::tusimple_accuracy(preds, gts, cfg["threshold"]);
    return json{{"frames", gts.size()}, {"threshold", r.threshold}, {"matched", r.matched},
                {"total_gt", r.total_gt}, {"accuracy", r.accuracy}};
  };
  c.csv = [](const json& r) {
    return csv_row({"frames", "threshold", "matched", "total_gt", "accuracy"}) +
           csv_row({r["frames"], r["threshold"], r["matched"], r["total_gt"], r["accuracy"]});
  };
  return c;
}

inline Command traj_rmse_command() {
  Command c{"traj-rmse", "Per-section easting/northing RMSE of trajectories against a centerline", {}, {}, {}};
  c.keys = concat(trajectory_input_keys(),
                  {{"sections", Kind::kStringList, json::array(), "sections as NAME:START_S:END_S (arclength, m)",
                    checks::nonempty()}});
  c.run = [](const json& cfg, const Context&) {
    const auto in = load_trajectories(cfg);
    const auto secs = parse_sections(cfg["sections"]);
    json runs = json::array();
    std::vector<json> per_run;
    for (const auto& t : in.runs) {
      json s = json::array();
      for (const auto& sec : secs) s.push_back(section_json(t, in.centerline, sec));
      per_run.push_back(s);
      runs.push_back(json{{"label", t.label}, {"samples", t.samples.size()}, {"sections", s}});
    }
    return json{{"centerline_length", in.centerline.length()},
                {"runs", runs},
                {"summary", json{{"sections", section_summary(secs, per_run)}}}};
  };
  c.csv = [](const json& r) {
    std::string out = "trajectory,section,rmse_x,rmse_y,rmse,n\n";
    for (const auto& run : r["runs"]) {
      for (const auto& s : run["sections"]) out += csv_row({run["label"], s["name"], s["rmse_x"], s["rmse_y"], s["rmse"], s["n"]});
    }
    return out;
  };
  return c;
}

inline Command restore_eval_command() {
  Command c{"restore-eval", "Lane-restoring verdicts from trajectories started off-center", {}, {}, {}};
  c.keys = concat(trajectory_input_keys(), restore_keys());
  c.run = [](const json& cfg, const Context&) {
    const auto in = load_trajectories(cfg);
    const auto spec = restore_from(cfg);
    json runs = json::array();
    std::vector<bool> outcomes;
    for (const auto& t : in.runs) {
      const auto offs = traj::lateral_offsets(t, in.centerline);
      const auto v = traj::restoring_verdict(offs, spec);
      outcomes.push_back(v.success);
      json row{{"label", t.label}};
      const double o = offs.empty() ? 0.0 : offs.front().offset;
      row["initial_offset_left_positive"] = o;
      row["initial_offset_right_positive"] = -o;
      row.update(verdict_json(v));
      runs.push_back(row);
    }
    return json{{"runs", runs}, {"success_rate", traj::success_rate(outcomes)}};
  };
  c.csv = [](const json& r) {
    std::string out = "trajectory,initial_offset_left_positive,success,return_time,reason\n";
    for (const auto& run : r["runs"]) {
      out += csv_row({run["label"], run["initial_offset_left_positive"], run["success"], run["return_time"], run["reason"]});
    }
    return out;
  };
  return c;
}

inline Command synth_command() {
  Command c{"synth", "Render lane-scene datasets, one directory per member of a scene series", {}, {}, {}};
  c.keys = concat(
      concat(concat({{"out_dir", Kind::kString, "", "output directory", checks::nonempty()},
                     {"series", Kind::kString, "single",
                      "thickness (0.125..0.2 m), texture (1.0, 0.6, 0.3), spacing (10, 5, 3 m) or single",
                      checks::one_of({"thickness", "texture", "spacing", "single"})},
                     {"frames", Kind::kInt, 200, "frames per member", checks::range(1, 1000000)},
                     {"seed", Kind::kInt, 1, "pose and noise seed", checks::nonnegative()},
                     {"lateral_jitter", Kind::kNumber, 0.3, "pose offset spread, m", checks::nonnegative()},
                     {"heading_jitter", Kind::kNumber, 2.0, "pose heading spread, degrees", checks::nonnegative()},
                     {"segmentation", Kind::kBool, false, "also write segmentation rasters (<member>_seg)", {}},
                     {"lane_color", Kind::kNumberList, json::array({255, 255, 255}), "segmentation lane RGB", {}}},
                    scene_keys()),
             camera_keys()),
      concat(track_keys("curve"), style_keys("crisp")));
  c.run = [](const json& cfg, const Context& ctx) {
    const auto base = scene_from(cfg);
    const auto cam = camera_from(cfg);
    const auto style = style_from(cfg);
    const sim::Track track(track_from(cfg));
    const auto color = cfg["lane_color"].get<std::vector<double>>();
    require(color.size() == 3, "lane_color needs 3 values");
    const lane::Rgb rgb{static_cast<std::uint8_t>(color[0]), static_cast<std::uint8_t>(color[1]),
                        static_cast<std::uint8_t>(color[2])};
    const std::uint64_t seed = cfg["seed"];
    const auto poses = sim::sample_poses(track, cfg["frames"], seed,
                                         {cfg["lateral_jitter"].get<double>(), cfg["heading_jitter"].get<double>()});
    const fs::path out = cfg["out_dir"].get<std::string>();
    json members = json::array();
    for (const auto& m : sim::series_members(cfg["series"], base)) {
      const fs::path dir = out / m.name;
      fs::create_directories(dir);
      const auto frames = sim::render_views(m.scene, cam, track, poses, style, seed, ctx.threads);
      parallel_for(frames.size(), ctx.threads, [&](std::size_t i) { save_image(frames[i], dir / sim::frame_name(i)); });
      json row{{"name", m.name}, {"dir", dir.string()}, {"frames", frames.size()}, {"scene", scene_json(m.scene)}};
      if (cfg["segmentation"].get<bool>()) {
        const fs::path seg = out / (m.name + "_seg");
        fs::create_directories(seg);
        parallel_for(poses.size(), ctx.threads, [&](std::size_t i) {
          save_image(sim::render_segmentation(m.scene, cam, poses[i], track, rgb).image, seg / sim::frame_name(i));
        });
        row["segmentation_dir"] = seg.string();
      }
      members.push_back(row);
    }
    return json{{"style", style.name}, {"members", members}};
  };
  return c;
}

inline Command simulate_command() {
  Command c{"simulate", "Closed-loop lane keeping episodes (render, style, detect, pure pursuit, step)", {}, {}, {}};
  c.keys = concat(
      concat(concat({{"episodes", Kind::kInt, 10, "number of episodes", checks::range(1, 100000)},
                     {"seed", Kind::kInt, 1, "base seed; episode i uses a seed derived from (seed, i)",
                      checks::nonnegative()},
                     {"speed", Kind::kNumber, 30.0, "vehicle speed, km/h", checks::nonnegative()},
                     {"init_offset", Kind::kNumber, 0.0, "initial lateral offset, m (positive = left)", {}},
                     {"duration", Kind::kNumber, 60.0, "maximum episode length, s", checks::positive()},
                     {"start_jitter", Kind::kNumber, 2.0, "seeded spread of the start position along the track, m",
                      checks::nonnegative()},
                     {"forced_steer", Kind::kNumber, nullptr, "fixed steering angle replacing the controller, rad", {}},
                     {"wheelbase", Kind::kNumber, 2.7, "m", checks::positive()},
                     {"lookahead_base", Kind::kNumber, 4.0, "pure pursuit look-ahead at standstill, m",
                      checks::positive()},
                     {"lookahead_gain", Kind::kNumber, 0.5, "look-ahead growth with speed, s", checks::positive()},
                     {"dt", Kind::kNumber, 0.05, "control period, s", checks::range(1e-4, 0.1)},
                     {"max_steer", Kind::kNumber, 0.6, "steering limit, rad", checks::positive()},
                     {"detect_threshold", Kind::kNumber, 150.0, "luminance threshold for lane paint",
                      checks::range(0, 255)},
                     {"detect_range", Kind::kNumber, 20.0, "farthest ground distance used by the detector, m",
                      checks::positive()},
                     {"sections", Kind::kStringList, json::array(),
                      "RMSE sections NAME:START_S:END_S; empty = one per track segment", {}},
                     {"out_dir", Kind::kString, "", "write trajectories, centerline and manifest here", {}},
                     {"save_frames", Kind::kBool, false, "dump styled frames under out_dir", {}}},
                    restore_keys()),
             concat(scene_keys(), camera_keys())),
      concat(track_keys("curve"), style_keys("crisp")));
  c.run = [](const json& cfg, const Context& ctx) {
    sim::EpisodeConfig ec;
    ec.track = track_from(cfg);
    ec.scene = scene_from(cfg);
    ec.camera = camera_from(cfg);
    ec.style = style_from(cfg);
    ec.controller.wheelbase = cfg["wheelbase"];
    ec.controller.lookahead_base = cfg["lookahead_base"];
    ec.controller.lookahead_gain = cfg["lookahead_gain"];
    ec.controller.dt = cfg["dt"];
    ec.controller.max_steer = cfg["max_steer"];
    ec.controller.validate();
    ec.detector.threshold = cfg["detect_threshold"];
    ec.detector.max_range = cfg["detect_range"];
    ec.speed = cfg["speed"].get<double>() / 3.6;
    ec.init_lateral_offset = cfg["init_offset"];
    ec.duration = cfg["duration"];
    ec.start_jitter = cfg["start_jitter"];
    if (!cfg["forced_steer"].is_null()) ec.forced_steer = cfg["forced_steer"].get<double>();
    const auto restore = restore_from(cfg);
    const sim::Track track(ec.track);
    const auto centerline = track.centerline(0.5);

    auto secs = parse_sections(cfg["sections"]);
    if (secs.empty()) {
      int ns = 0, na = 0;
      for (const auto& r : track.segment_ranges()) {
        const std::string name = r.is_arc ? "arc_" + std::to_string(++na) : "straight_" + std::to_string(++ns);
        secs.push_back({name, r.start_s, std::min(r.end_s, centerline.length())});
      }
    }

    const std::string out_dir = cfg["out_dir"];
    const bool save_frames = cfg["save_frames"];
    require(!save_frames || !out_dir.empty(), "save_frames needs out_dir");
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      traj::write_centerline(fs::path(out_dir) / "centerline.csv", centerline);
    }

    const int n = cfg["episodes"];
    const std::uint64_t base = cfg["seed"];
    std::vector<json> episodes(n);
    std::vector<json> per_run(n);
    std::vector<bool> completed(n), restored(n);
    std::vector<double> max_offsets(n);
    parallel_for(static_cast<std::size_t>(n), ctx.threads, [&](std::size_t i) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "episode_%03zu", i);
      sim::EpisodeConfig e = ec;
      if (save_frames) e.frame_dir = fs::path(out_dir) / (std::string(stem) + "_frames");
      const std::uint64_t seed = sim::episode_seed(base, i);
      auto log = sim::run_episode(e, seed);
      log.trajectory.label = stem;
      if (!out_dir.empty()) traj::write_trajectory(fs::path(out_dir) / (std::string(stem) + ".csv"), log.trajectory);
      double max_off = 0.0;
      for (const auto& s : log.steps) max_off = std::max(max_off, std::abs(s.offset));
      json s = json::array();
      for (const auto& sec : secs) s.push_back(section_json(log.trajectory, centerline, sec));
      const auto v = traj::restoring_verdict(log.offsets(), restore);
      completed[i] = log.termination != "off_road";
      restored[i] = v.success;
      max_offsets[i] = max_off;
      per_run[i] = s;
      episodes[i] = json{{"index", i},
                         {"seed", seed},
                         {"termination", log.termination},
                         {"success", completed[i]},
                         {"steps", log.steps.size()},
                         {"frames_rendered", log.frames_rendered},
                         {"commands", log.commands},
                         {"state_updates", log.state_updates},
                         {"detection_failures", log.detection_failures},
                         {"initial_offset", log.steps.front().offset},
                         {"final_offset", log.steps.back().offset},
                         {"max_abs_offset", max_off},
                         {"sections", s},
                         {"restore", verdict_json(v)}};
    });
    double mean_max = 0.0;
    for (double m : max_offsets) mean_max += m / n;
    json summary{{"episodes", n},
                 {"success_rate", traj::success_rate(completed)},
                 {"restore_success_rate", traj::success_rate(restored)},
                 {"restore_successes", std::count(restored.begin(), restored.end(), true)},
                 {"mean_max_abs_offset", mean_max},
                 {"sections", section_summary(secs, per_run)}};
    json sec_list = json::array();
    for (const auto& s : secs) sec_list.push_back(json{{"name", s.name}, {"start_s", s.start_s}, {"end_s", s.end_s}});
    return json{{"style", json{{"name", ec.style.name},
                               {"blur_sigma", ec.style.blur_sigma},
                               {"contrast", ec.style.contrast},
                               {"noise_sigma", ec.style.noise_sigma}}},
                {"track_length", track.length()},
                {"section_ranges", sec_list},
                {"summary", summary},
                {"episodes", episodes}};
  };
  c.csv = [](const json& r) {
    std::string out = "episode,seed,termination,max_abs_offset,section,rmse_x,rmse_y,rmse,n\n";
    for (const auto& e : r["episodes"]) {
      for (const auto& s : e["sections"]) {
        out += csv_row({e["index"], e["seed"], e["termination"], e["max_abs_offset"], s["name"], s["rmse_x"],
                        s["rmse_y"], s["rmse"], s["n"]});
      }
    }
    return out;
  };
  return c;
}

/// Table-shaped summary: one row per run output, x/y RMSE per section plus
/// success rate.
inline Command report_command() {
  Command c{"report", "Merge simulate, traj-rmse and restore-eval reports into one summary table", {}, {}, {}};
  c.keys = {
      {"inputs", Kind::kStringList, json::array(), "report files written by other subcommands", checks::nonempty()},
      {"labels", Kind::kStringList, json::array(), "row labels (default: file stems)", {}},
  };
  c.run = [](const json& cfg, const Context&) {
    const auto paths = strings(cfg["inputs"]);
    const auto labels = strings(cfg["labels"]);
    if (paths.empty()) throw ValidationError("empty results: report needs at least one input");
    require(labels.empty() || labels.size() == paths.size(), "labels must match inputs one to one");
    json columns = json::array();
    json rows = json::array();
    for (std::size_t i = 0; i < paths.size(); ++i) {
      std::ifstream in(paths[i], std::ios::binary);
      if (!in) throw ValidationError("input not found: " + paths[i]);
      json rep;
      try {
        rep = json::parse(in);
      } catch (const json::parse_error&) {
        throw ValidationError("not a report file: " + paths[i]);
      }
      if (!rep.is_object() || !rep.contains("command") || !rep.contains("result")) {
        throw ValidationError("not a report file: " + paths[i]);
      }
      const std::string cmd = rep["command"];
      const json& res = rep["result"];
      json row{{"label", labels.empty() ? fs::path(paths[i]).stem().string() : labels[i]}, {"command", cmd}};
      json secs = json::object();
      json rate = nullptr;
      if (cmd == "simulate" || cmd == "traj-rmse") {
        for (const auto& s : res["summary"]["sections"]) {
          const std::string name = s["name"];
          secs[name] = json{{"x", s["mean_rmse_x"]}, {"y", s["mean_rmse_y"]}};
          if (std::find(columns.begin(), columns.end(), json(name)) == columns.end()) columns.push_back(name);
        }
        if (cmd == "simulate") rate = res["summary"]["success_rate"];
      } else if (cmd == "restore-eval") {
        rate = res["success_rate"];
      } else {
        throw ValidationError("report cannot merge '" + cmd + "' output: " + paths[i]);
      }
      row["sections"] = secs;
      row["success_rate"] = rate;
      rows.push_back(row);
    }
    return json{{"columns", columns}, {"rows", rows}};
  };
  c.csv = [](const json& r) {
    std::string out = "label";
    for (const auto& col : r["columns"]) out += "," + col.get<std::string>() + "_x," + col.get<std::string>() + "_y";
    out += ",success_rate\n";
    for (const auto& row : r["rows"]) {
      out += cell(row["label"]);
      for (const auto& col : r["columns"]) {
        const std::string name = col;
        const bool has = row["sections"].contains(name);
        out += "," + (has ? cell(row["sections"][name]["x"]) : std::string());
        out += "," + (has ? cell(row["sections"][name]["y"]) : std::string());
      }
      out += "," + cell(row["success_rate"]) + "\n";
    }
    return out;
  };
  return c;
}

}  // namespace detail

inline std::vector<Command> all_commands() {
  return {detail::fid_command(),           detail::fid_matrix_command(),    detail::fsim_command(),
          detail::select_lambda_command(), detail::extract_gt_command(),    detail::lane_accuracy_command(),
          detail::traj_rmse_command(),     detail::restore_eval_command(), detail::synth_command(),
          detail::simulate_command(),      detail::report_command()};
}

/// Report envelope: tool, version, command, resolved config, result; floats
/// rounded to 6 significant digits.
inline json make_report(const Command& cmd, const json& cfg, json result) {
  json rep{{"tool", kToolName}, {"version", kToolVersion}, {"command", cmd.name}, {"config", cfg},
           {"result", std::move(result)}};
  round_floats(rep);
  return rep;
}

}  // namespace s2r::cli
