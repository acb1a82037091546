#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/core/image_set.hpp"
#include "s2r/fid/features.hpp"

namespace s2r::fid {

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  Eigen::Index d() const { return mean.size(); }
};

/// Column means and unbiased (n-1) covariance, symmetrized.
inline GaussianStats fit_gaussian(const FeatureMatrix& feats) {
  const auto n = feats.n();
  if (n < 2) {
    throw ValidationError("fit_gaussian needs at least 2 samples, got " + std::to_string(n));
  }
  if (!feats.values.allFinite()) throw ValidationError("feature matrix contains non-finite values");
  GaussianStats g;
  g.mean = feats.values.colwise().mean().transpose();
  const Eigen::MatrixXd centered = feats.values.rowwise() - g.mean.transpose();
  const Eigen::MatrixXd c = (centered.transpose() * centered) / static_cast<double>(n - 1);
  g.cov = 0.5 * (c + c.transpose());
  return g;
}

inline constexpr double kSymmetryTolerance = 1e-9;

/// Principal square root of a symmetric PSD matrix via a symmetric
/// eigendecomposition. Eigenvalues below zero (round-off) are clamped.
inline Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
  require(m.rows() == m.cols(), "sqrtm_psd needs a square matrix");
  if (!m.allFinite()) throw ValidationError("sqrtm_psd: matrix has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    throw ValidationError("sqrtm_psd: matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw ComputationError("sqrtm_psd: eigendecomposition failed");
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = es.eigenvectors();
  Eigen::MatrixXd r = v * root.asDiagonal() * v.transpose();
  return 0.5 * (r + r.transpose());
}

struct FrechetResult {
  double value = 0.0;
  bool regularized = false;
};

inline constexpr double kRegularizationEps = 1e-6;
inline constexpr double kNegativeFloor = -1e-6;

namespace detail {

// Tr((S_a^{1/2} S_b S_a^{1/2})^{1/2}), equal in trace to Tr((S_a S_b)^{1/2})
// but built only from symmetric factors. NaN if the solver fails.
inline double sqrt_product_trace(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  try {
    const Eigen::MatrixXd sa = sqrtm_psd(a);
    Eigen::MatrixXd inner = sa * b * sa;
    inner = 0.5 * (inner + inner.transpose());
    if (!inner.allFinite()) return std::nan("");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return std::nan("");
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  } catch (const ComputationError&) {
    return std::nan("");
  }
}

}  // namespace detail

/// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a^{1/2} S_b S_a^{1/2})^{1/2}).
/// On a numerical failure the covariances are retried once with eps*I added
/// and the result is flagged as regularized.
inline FrechetResult frechet(const GaussianStats& a, const GaussianStats& b) {
  if (a.d() != b.d() || a.cov.rows() != a.d() || b.cov.rows() != b.d()) {
    throw ValidationError("dimension mismatch: " + std::to_string(a.d()) + " vs " + std::to_string(b.d()));
  }
  if (!a.mean.allFinite() || !b.mean.allFinite() || !a.cov.allFinite() || !b.cov.allFinite()) {
    throw ValidationError("gaussian statistics contain non-finite values");
  }
  const double mean_term = (a.mean - b.mean).squaredNorm();
  FrechetResult r;
  double cross = detail::sqrt_product_trace(a.cov, b.cov);
  double tr_a = a.cov.trace(), tr_b = b.cov.trace();
  if (!std::isfinite(cross)) {
    r.regularized = true;
    const auto eye = Eigen::MatrixXd::Identity(a.d(), a.d());
    const Eigen::MatrixXd ra = a.cov + kRegularizationEps * eye;
    const Eigen::MatrixXd rb = b.cov + kRegularizationEps * eye;
    cross = detail::sqrt_product_trace(ra, rb);
    tr_a = ra.trace();
    tr_b = rb.trace();
    if (!std::isfinite(cross)) throw ComputationError("frechet distance non-finite after regularization");
  }
  double value = mean_term + tr_a + tr_b - 2.0 * cross;
  if (value < 0.0) {
    if (value < kNegativeFloor) {
      throw ComputationError("frechet distance below numeric floor: " + std::to_string(value));
    }
    value = 0.0;
  }
  r.value = value;
  return r;
}

inline double frechet_distance(const GaussianStats& a, const GaussianStats& b) { return frechet(a, b).value; }

struct FidReport {
  std::string label_a;
  std::string label_b;
  double value = 0.0;
  int d = 0;
  int n_a = 0;
  int n_b = 0;
  bool regularized = false;
};

inline FidReport fid_between(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.d() != b.d()) {
    throw ValidationError("feature dimensionality mismatch: " + std::to_string(a.d()) + " vs " +
                          std::to_string(b.d()));
  }
  const auto r = frechet(fit_gaussian(a), fit_gaussian(b));
  return {a.label, b.label, r.value, static_cast<int>(a.d()), static_cast<int>(a.n()), static_cast<int>(b.n()),
          r.regularized};
}

inline FidReport fid_between_sets(const ImageSet& a, const ImageSet& b, int d, std::uint64_t seed,
                                  int threads = 1) {
  return fid_between(builtin_features(a, d, seed, threads), builtin_features(b, d, seed, threads));
}

/// Pairwise distances; entry (i, j) is set for i <= j only, the rest is NaN.
struct FidTable {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;
  std::vector<FidReport> pairs;
};

inline FidTable fid_matrix(const std::vector<FeatureMatrix>& feats) {
  require(feats.size() >= 2, "fid_matrix needs at least 2 sets");
  const std::size_t k = feats.size();
  FidTable t;
  std::vector<GaussianStats> stats;
  for (const auto& f : feats) {
    t.labels.push_back(f.label);
    stats.push_back(fit_gaussian(f));
    require(f.d() == feats[0].d(), "feature dimensionality mismatch in fid_matrix");
  }
  t.values.assign(k, std::vector<double>(k, std::nan("")));
  for (std::size_t i = 0; i < k; ++i) {
    t.values[i][i] = 0.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      const auto r = frechet(stats[i], stats[j]);
      t.values[i][j] = r.value;
      t.pairs.push_back({feats[i].label, feats[j].label, r.value, static_cast<int>(feats[i].d()),
                         static_cast<int>(feats[i].n()), static_cast<int>(feats[j].n()), r.regularized});
    }
  }
  return t;
}

inline FidTable fid_matrix(const std::vector<ImageSet>& sets, int d, std::uint64_t seed, int threads = 1) {
  require(sets.size() >= 2, "fid_matrix needs at least 2 sets");
  std::vector<FeatureMatrix> feats;
  feats.reserve(sets.size());
  for (const auto& s : sets) feats.push_back(builtin_features(s, d, seed, threads));
  return fid_matrix(feats);
}

}  // namespace s2r::fid
