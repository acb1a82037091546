#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "s2r/core/error.hpp"
#include "s2r/lane/lane_frame.hpp"

// Line-delimited label files in the TuSimple layout:
//   {"lanes": [[x, ...], ...], "h_samples": [y, ...], "raw_file": "..."}
namespace s2r::lane {

inline std::string to_tusimple_line(const LaneFrame& f) {
  nlohmann::ordered_json j;
  j["lanes"] = f.lanes;
  j["h_samples"] = f.h_samples;
  j["raw_file"] = f.frame_id;
  return j.dump();
}

inline LaneFrame from_tusimple_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed lane record: ") + e.what());
  }
  LaneFrame f;
  try {
    f.frame_id = j.at("raw_file").get<std::string>();
    f.h_samples = j.at("h_samples").get<std::vector<int>>();
    f.lanes = j.at("lanes").get<std::vector<std::vector<int>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed lane record: ") + e.what());
  }
  f.validate();
  return f;
}

inline std::vector<LaneFrame> read_lane_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("unreadable file: " + path.string());
  std::vector<LaneFrame> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(from_tusimple_line(line));
  }
  return out;
}

inline void write_lane_file(const std::filesystem::path& path, const std::vector<LaneFrame>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("unwritable output path: " + path.string());
  for (const auto& f : frames) out << to_tusimple_line(f) << '\n';
  if (!out) throw ValidationError("unwritable output path: " + path.string());
}

}  // namespace s2r::lane
