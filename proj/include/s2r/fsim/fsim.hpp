#pragma once

#include <algorithm>
#include <charconv>
#include <optional>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"
#include "s2r/core/image_set.hpp"
#include "s2r/core/parallel.hpp"
#include "s2r/fsim/gradient.hpp"
#include "s2r/fsim/phase_congruency.hpp"

namespace s2r::fsim {

/// Phase-congruency and gradient maps of one luminance image.
struct FeatureMaps {
  Plane pc;
  Plane grad;
};

inline FeatureMaps feature_maps(const Image& img, const LogGaborBank& bank) {
  const Plane lum = to_plane(img);
  return {phase_congruency(lum, bank), gradient_magnitude(lum)};
}

/// FSIM on luminance: similarity of PC and gradient maps, pooled with
/// max(PC1, PC2) as weight. Structureless pairs (zero total weight) fall back
/// to an unweighted mean.
inline double fsim_from_maps(const FeatureMaps& a, const FeatureMaps& b, const FsimParams& p) {
  const std::size_t n = a.pc.values.size();
  double num = 0.0, den = 0.0, plain = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p1 = a.pc.values[i], p2 = b.pc.values[i];
    const double g1 = a.grad.values[i], g2 = b.grad.values[i];
    const double s_pc = (2.0 * p1 * p2 + p.t1) / (p1 * p1 + p2 * p2 + p.t1);
    const double s_g = (2.0 * g1 * g2 + p.t2) / (g1 * g1 + g2 * g2 + p.t2);
    const double wgt = std::max(p1, p2);
    num += s_pc * s_g * wgt;
    den += wgt;
    plain += s_pc * s_g;
  }
  if (den <= 0.0) return plain / static_cast<double>(n);
  return num / den;
}

inline double fsim_score(const Image& a, const Image& b, const FsimParams& p = {}) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ValidationError("dimension mismatch: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                          " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
  const LogGaborBank bank(a.width(), a.height(), p);
  return fsim_from_maps(feature_maps(a, bank), feature_maps(b, bank), p);
}

/// Crop band used for lane-only comparisons: full width, 245 rows, ending
/// 130 rows above the bottom edge (drops sky and bonnet on 808x620 frames).
struct DefaultRoi {
  static constexpr int kHeight = 245;
  static constexpr int kBottomMargin = 130;
};

inline Roi default_fsim_roi(int width, int height) {
  const int y0 = height - DefaultRoi::kBottomMargin - DefaultRoi::kHeight;
  require(y0 >= 0, "image too short for the default FSIM band (needs >= " +
                       std::to_string(DefaultRoi::kHeight + DefaultRoi::kBottomMargin) + " rows)");
  return {0, y0, width, DefaultRoi::kHeight};
}

struct MeanFsim {
  double mean = 0.0;
  std::vector<double> scores;
};

/// Mean FSIM over pairs matched by position (sorted filename order).
inline MeanFsim mean_fsim(const ImageSet& ref, const ImageSet& gen, const Roi& roi, const FsimParams& p = {},
                          int threads = 1) {
  if (ref.size() != gen.size()) {
    throw ValidationError("length mismatch: reference set has " + std::to_string(ref.size()) +
                          " images, generated set has " + std::to_string(gen.size()));
  }
  require(ref.size() > 0, "mean_fsim needs at least one pair");
  const LogGaborBank bank(roi.width, roi.height, p);
  MeanFsim out;
  out.scores.resize(ref.size());
  parallel_for(ref.size(), threads, [&](std::size_t i) {
    const Image a = crop(ref.images[i], roi);
    const Image b = crop(gen.images[i], roi);
    out.scores[i] = fsim_from_maps(feature_maps(a, bank), feature_maps(b, bank), p);
  });
  double sum = 0.0;
  for (double s : out.scores) sum += s;
  out.mean = sum / static_cast<double>(out.scores.size());
  return out;
}

struct LambdaCandidate {
  std::string lambda_id;
  double mean_fsim = 0.0;
};

namespace detail {

inline std::optional<double> numeric_id(const std::string& id) {
  double v = 0.0;
  const auto* end = id.data() + id.size();
  const auto [ptr, ec] = std::from_chars(id.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

// Numeric ids order numerically and before non-numeric ones.
inline bool id_less(const std::string& a, const std::string& b) {
  const auto na = numeric_id(a), nb = numeric_id(b);
  if (na && nb) return *na < *nb || (*na == *nb && a < b);
  if (na != nb) return na.has_value();
  return a < b;
}

}  // namespace detail

/// Candidate with the highest mean FSIM; ties go to the smallest id.
inline std::string select_lambda(const std::vector<LambdaCandidate>& candidates) {
  require(!candidates.empty(), "select_lambda needs at least one candidate");
  const LambdaCandidate* best = &candidates.front();
  for (const auto& c : candidates) {
    if (c.mean_fsim > best->mean_fsim || (c.mean_fsim == best->mean_fsim && detail::id_less(c.lambda_id, best->lambda_id))) {
      best = &c;
    }
  }
  return best->lambda_id;
}

}  // namespace s2r::fsim
