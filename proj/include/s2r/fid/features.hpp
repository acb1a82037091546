#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"
#include "s2r/core/image_set.hpp"
#include "s2r/core/parallel.hpp"

namespace s2r::fid {

/// n x d embedding matrix, one row per image.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::string label;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index d() const { return values.cols(); }
};

inline constexpr int kThumbSide = 32;
inline constexpr int kThumbSize = kThumbSide * kThumbSide;

namespace detail {

struct Tap {
  int first = 0;
  std::vector<double> weights;
};

// Triangle ("bilinear") resampling taps. The filter support widens with the
// downscale factor so every source pixel contributes, which keeps thin lane
// markings from aliasing away at 32x32.
inline std::vector<Tap> triangle_taps(int src, int dst) {
  const double scale = static_cast<double>(src) / dst;
  const double support = std::max(1.0, scale);
  std::vector<Tap> taps(dst);
  for (int i = 0; i < dst; ++i) {
    const double center = (i + 0.5) * scale;
    const int lo = std::max(0, static_cast<int>(std::floor(center - support)));
    const int hi = std::min(src - 1, static_cast<int>(std::ceil(center + support)));
    Tap& t = taps[i];
    t.first = lo;
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double w = std::max(0.0, 1.0 - std::abs((j + 0.5 - center) / support));
      t.weights.push_back(w);
      sum += w;
    }
    for (auto& w : t.weights) w /= sum;
  }
  return taps;
}

}  // namespace detail

/// Luminance thumbnail in [0, 1], resampled to side x side with a triangle
/// filter, flattened row-major.
inline std::vector<double> thumbnail(const Image& img, int side = kThumbSide) {
  const Image lum = to_luminance(img);
  const int w = lum.width(), h = lum.height();
  const auto tx = detail::triangle_taps(w, side);
  const auto ty = detail::triangle_taps(h, side);
  std::vector<double> horiz(static_cast<std::size_t>(h) * side);
  for (int y = 0; y < h; ++y) {
    auto row = lum.row(y);
    for (int i = 0; i < side; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < tx[i].weights.size(); ++k) acc += tx[i].weights[k] * row[tx[i].first + k];
      horiz[static_cast<std::size_t>(y) * side + i] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(side) * side);
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < ty[j].weights.size(); ++k) {
        acc += ty[j].weights[k] * horiz[(ty[j].first + k) * side + i];
      }
      out[static_cast<std::size_t>(j) * side + i] = acc / 255.0;
    }
  }
  return out;
}

/// Fixed-seed Gaussian random projection from the 1024-pixel thumbnail to d
/// features. Each output column is standardized with constants that depend
/// only on the projection: inputs are treated as iid U(0,1) pixels.
class RandomProjection {
 public:
  RandomProjection(int d, std::uint64_t seed) {
    if (d < 1 || d > kThumbSize) {
      throw ValidationError("feature dimensionality must be in [1, " + std::to_string(kThumbSize) +
                            "], got " + std::to_string(d));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    weights_.resize(kThumbSize, d);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < kThumbSize; ++i) weights_(i, j) = normal(rng);
    }
    offset_ = 0.5 * weights_.colwise().sum();
    Eigen::RowVectorXd spread = (weights_.colwise().norm() / std::sqrt(12.0));
    inv_scale_ = spread.cwiseInverse();
  }

  int d() const { return static_cast<int>(weights_.cols()); }

  Eigen::RowVectorXd project(const std::vector<double>& thumb) const {
    const Eigen::Map<const Eigen::RowVectorXd> x(thumb.data(), kThumbSize);
    return ((x * weights_) - offset_).cwiseProduct(inv_scale_);
  }

 private:
  Eigen::MatrixXd weights_;
  Eigen::RowVectorXd offset_;
  Eigen::RowVectorXd inv_scale_;
};

/// Built-in deterministic extractor: luminance, 32x32 triangle downscale,
/// seeded random projection. A desk-scale stand-in for a deep embedding;
/// a single-image set yields a 1 x d matrix that fit_gaussian rejects.
inline FeatureMatrix builtin_features(const ImageSet& set, int d, std::uint64_t seed, int threads = 1) {
  require(!set.images.empty(), "cannot extract features from an empty image set");
  const RandomProjection proj(d, seed);
  FeatureMatrix out;
  out.label = set.label;
  out.values.resize(static_cast<Eigen::Index>(set.size()), d);
  parallel_for(set.size(), threads, [&](std::size_t i) {
    out.values.row(static_cast<Eigen::Index>(i)) = proj.project(thumbnail(set.images[i]));
  });
  return out;
}

}  // namespace s2r::fid
