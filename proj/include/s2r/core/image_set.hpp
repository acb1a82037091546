#pragma once

#include <fnmatch.h>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"
#include "s2r/core/image_io.hpp"
#include "s2r/core/parallel.hpp"

namespace s2r {

/// Ordered, dimension-homogeneous collection of images. Position in the set
/// is the pairing key between two sets.
struct ImageSet {
  std::string label;
  std::vector<Image> images;
  std::vector<std::filesystem::path> paths;

  std::size_t size() const { return images.size(); }
};

/// Paths in `dir` whose filename matches the shell glob, sorted by filename.
inline std::vector<std::filesystem::path> list_matching(const std::filesystem::path& dir,
                                                        const std::string& glob) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (::fnmatch(glob.c_str(), name.c_str(), 0) == 0) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return out;
}

inline void check_homogeneous(const ImageSet& set) {
  for (std::size_t i = 1; i < set.images.size(); ++i) {
    if (!set.images[i].same_shape(set.images[0])) {
      throw ValidationError("heterogeneous dimensions in set '" + set.label + "': " +
                            set.paths.at(i).filename().string() + " is " +
                            std::to_string(set.images[i].width()) + "x" +
                            std::to_string(set.images[i].height()) + "x" +
                            std::to_string(set.images[i].channels()) + ", expected " +
                            std::to_string(set.images[0].width()) + "x" +
                            std::to_string(set.images[0].height()) + "x" +
                            std::to_string(set.images[0].channels()));
    }
  }
}

inline ImageSet load_image_set(const std::filesystem::path& dir, const std::string& glob = "*.png",
                               int threads = 1) {
  ImageSet set;
  set.label = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
  set.paths = list_matching(dir, glob);
  if (set.paths.empty()) throw ValidationError("empty match: no files matching '" + glob + "' in " + dir.string());
  set.images.resize(set.paths.size());
  parallel_for(set.paths.size(), threads, [&](std::size_t i) { set.images[i] = load_image(set.paths[i]); });
  check_homogeneous(set);
  return set;
}

}  // namespace s2r
