#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "s2r/fid/feature_file.hpp"
#include "s2r/fid/features.hpp"
#include "s2r/fid/frechet.hpp"
#include "s2r/sim/dataset.hpp"
#include "support.hpp"

using namespace s2r;
using namespace s2r::fid;
using s2r::testing::TempDir;

namespace {

FeatureMatrix from_rows(std::vector<std::vector<double>> rows) {
  FeatureMatrix f;
  f.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) f.values(i, j) = rows[i][j];
  }
  return f;
}

GaussianStats scalar_stats(double mu, double var) {
  GaussianStats g;
  g.mean = Eigen::VectorXd::Constant(1, mu);
  g.cov = Eigen::MatrixXd::Constant(1, 1, var);
  return g;
}

// Random SPD matrix with eigenvalues spread log-uniformly over [1/cond, 1].
Eigen::MatrixXd random_psd(int d, double cond, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = n(rng);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd ev(d);
  for (int i = 0; i < d; ++i) ev(i) = std::pow(cond, -static_cast<double>(i) / std::max(1, d - 1));
  Eigen::MatrixXd a = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST(FitGaussian, HandExamples) {
  const auto g1 = fit_gaussian(from_rows({{0}, {2}}));
  EXPECT_DOUBLE_EQ(g1.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(g1.cov(0, 0), 2.0);
  const auto g2 = fit_gaussian(from_rows({{0, 0}, {1, 1}}));
  EXPECT_DOUBLE_EQ(g2.mean(0), 0.5);
  EXPECT_DOUBLE_EQ(g2.mean(1), 0.5);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(g2.cov(i, j), 0.5);
  }
  const auto g3 = fit_gaussian(from_rows({{3, -1, 2}, {3, -1, 2}, {3, -1, 2}}));
  EXPECT_EQ(g3.cov, Eigen::MatrixXd::Zero(3, 3));
}

TEST(FitGaussian, MatchesBruteForceCovariance) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 99);
    const int d = 1 + static_cast<int>(rng() % 8);
    FeatureMatrix f;
    f.values.resize(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) f.values(i, j) = u(rng) + 3.0 * j;
    }
    const auto g = fit_gaussian(f);
    for (int a = 0; a < d; ++a) {
      double ma = 0;
      for (int i = 0; i < n; ++i) ma += f.values(i, a);
      ma /= n;
      EXPECT_NEAR(g.mean(a), ma, 1e-12 * std::max(1.0, std::abs(ma)));
      for (int b = 0; b < d; ++b) {
        double mb = 0;
        for (int i = 0; i < n; ++i) mb += f.values(i, b);
        mb /= n;
        double s = 0;
        for (int i = 0; i < n; ++i) s += (f.values(i, a) - ma) * (f.values(i, b) - mb);
        s /= (n - 1);
        EXPECT_NEAR(g.cov(a, b), s, 1e-12 * std::max(1.0, std::abs(s)));
      }
    }
  }
}

TEST(FitGaussian, RejectsTooFewRowsAndNonFinite) {
  EXPECT_THROW(fit_gaussian(from_rows({{1, 2}})), ValidationError);
  EXPECT_THROW(fit_gaussian(from_rows({{1}, {NAN}})), ValidationError);
}

TEST(SqrtmPsd, AnalyticCases) {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_LT((sqrtm_psd(eye) - eye).norm(), 1e-14);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  const auto r = sqrtm_psd(d);
  EXPECT_NEAR(r(0, 0), 2, 1e-14);
  EXPECT_NEAR(r(1, 1), 3, 1e-14);
  EXPECT_NEAR(r(0, 1), 0, 1e-14);
}

TEST(SqrtmPsd, MultiplyBackOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 64);
    const Eigen::MatrixXd a = random_psd(d, 1e8, rng);
    const Eigen::MatrixXd r = sqrtm_psd(a);
    EXPECT_LT((r * r - a).norm() / a.norm(), 1e-6) << "d=" << d;
    EXPECT_LT((r - r.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(SqrtmPsd, RejectsAsymmetricAndNonFinite) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(0, 1) = 0.5;
  EXPECT_THROW(sqrtm_psd(m), ValidationError);
  m(0, 1) = NAN;
  EXPECT_THROW(sqrtm_psd(m), ValidationError);
}

TEST(SqrtmPsd, ClampsRoundOffNegativeEigenvalues) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 1, 1, 1 - 1e-17;
  const auto r = sqrtm_psd(m);
  EXPECT_TRUE(r.allFinite());
  EXPECT_LT((r * r - m).norm(), 1e-12);
}

TEST(Frechet, ScalarClosedForm) {
  EXPECT_NEAR(frechet_distance(scalar_stats(0, 1), scalar_stats(3, 4)), 10.0, 1e-12);
  EXPECT_NEAR(frechet_distance(scalar_stats(0, 1), scalar_stats(0, 4)), 1.0, 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mu(-10, 10), var(1e-3, 100);
  for (int i = 0; i < 1000; ++i) {
    const double m1 = mu(rng), m2 = mu(rng), v1 = var(rng), v2 = var(rng);
    const double expect = (m1 - m2) * (m1 - m2) + v1 + v2 - 2 * std::sqrt(v1 * v2);
    const double got = frechet_distance(scalar_stats(m1, v1), scalar_stats(m2, v2));
    EXPECT_NEAR(got, expect, 1e-9 * std::max(1.0, expect));
  }
}

TEST(Frechet, IdentitySymmetryAndCommutingClosedForm) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 20);
    GaussianStats a, b;
    a.mean = Eigen::VectorXd::Random(d);
    b.mean = Eigen::VectorXd::Random(d);
    a.cov = random_psd(d, 1e3, rng);
    b.cov = random_psd(d, 1e3, rng);
    EXPECT_NEAR(frechet_distance(a, a), 0.0, 1e-6);
    const double ab = frechet_distance(a, b), ba = frechet_distance(b, a);
    EXPECT_NEAR(ab, ba, 1e-6 * std::max(1.0, ab));
    EXPECT_GE(ab, 0.0);
  }
  // Diagonal covariances commute: the trace term splits per coordinate.
  GaussianStats a, b;
  a.mean = Eigen::Vector3d(1, 2, 3);
  b.mean = Eigen::Vector3d(0, 2, 5);
  a.cov = Eigen::Vector3d(1, 4, 9).asDiagonal();
  b.cov = Eigen::Vector3d(4, 4, 1).asDiagonal();
  const double expect = 1 + 4 + (1 + 4 - 4) + (4 + 4 - 8) + (9 + 1 - 6);
  EXPECT_NEAR(frechet_distance(a, b), expect, 1e-12);
}

TEST(Frechet, DimensionMismatchAndOverflow) {
  EXPECT_THROW(frechet(scalar_stats(0, 1), GaussianStats{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)}),
               ValidationError);
  const auto r = frechet(scalar_stats(0, 1), scalar_stats(1, 2));
  EXPECT_FALSE(r.regularized);
  // Entries so large that the product overflows even after the retry.
  EXPECT_THROW(frechet(scalar_stats(0, 1e200), scalar_stats(0, 1e200)), ComputationError);
}

TEST(Thumbnail, IdentityAtNativeSize) {
  Image img(32, 32, 1);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) img.at(x, y) = static_cast<std::uint8_t>((x * 31 + y * 7) % 256);
  }
  const auto t = thumbnail(img);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) EXPECT_NEAR(t[y * 32 + x], img.at(x, y) / 255.0, 1e-15);
  }
}

TEST(Thumbnail, TriangleFilterHalving) {
  // 64 -> 32: output i averages source 2i-1..2i+2 with weights 1,3,3,1 (edges renormalised).
  Image img(64, 64, 1);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) img.at(x, y) = static_cast<std::uint8_t>(x * 3);
  }
  const auto t = thumbnail(img);
  for (int i = 0; i < 32; ++i) {
    double num = 0, den = 0;
    const int taps[4] = {2 * i - 1, 2 * i, 2 * i + 1, 2 * i + 2};
    const double w[4] = {1, 3, 3, 1};
    for (int k = 0; k < 4; ++k) {
      if (taps[k] < 0 || taps[k] > 63) continue;
      num += w[k] * taps[k] * 3 / 255.0;
      den += w[k];
    }
    EXPECT_NEAR(t[5 * 32 + i], num / den, 1e-9) << i;
  }
}

TEST(BuiltinFeatures, ShapeDeterminismAndBounds) {
  ImageSet set;
  set.label = "ten";
  std::mt19937 rng(5);
  for (int i = 0; i < 10; ++i) {
    Image img(40, 30, 3);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
    set.images.push_back(img);
  }
  const auto a = builtin_features(set, 64, 9);
  const auto b = builtin_features(set, 64, 9, 4);
  EXPECT_EQ(a.n(), 10);
  EXPECT_EQ(a.d(), 64);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, builtin_features(set, 64, 10).values);
  EXPECT_THROW(builtin_features(set, 1025, 1), ValidationError);
  EXPECT_THROW(builtin_features(set, 0, 1), ValidationError);
  ImageSet one{"one", {set.images[0]}, {}};
  const auto f1 = builtin_features(one, 8, 1);
  EXPECT_EQ(f1.n(), 1);
  EXPECT_THROW(fit_gaussian(f1), ValidationError);
}

TEST(BuiltinFeatures, StandardizedForUniformNoise) {
  // iid uniform pixels map to roughly zero-mean, unit-variance features.
  ImageSet set;
  std::mt19937 rng(1);
  for (int i = 0; i < 200; ++i) {
    Image img(32, 32, 1);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
    set.images.push_back(img);
  }
  const auto f = builtin_features(set, 16, 2);
  const auto g = fit_gaussian(f);
  EXPECT_LT(g.mean.cwiseAbs().maxCoeff(), 0.3);
  for (int j = 0; j < 16; ++j) {
    EXPECT_GT(g.cov(j, j), 0.7);
    EXPECT_LT(g.cov(j, j), 1.3);
  }
}

TEST(FidSets, SelfIsZeroAndHalvesBelowThicknessChange) {
  using namespace s2r::sim;
  CameraSpec cam;
  cam.width = 202;
  cam.height = 155;
  const Track track(curve_track());
  const auto poses = sample_poses(track, 80, 3);
  const auto members = series_members("thickness", SceneSpec{});
  const auto render = [&](const SceneSpec& s) {
    return render_views(s, cam, track, poses, StylePreset::crisp(), 1);
  };
  const auto thin = render(members[0].scene);
  const auto thick = render(members[3].scene);
  ImageSet all{"all", thin, {}};
  ImageSet first{"first", {thin.begin(), thin.begin() + 40}, {}};
  ImageSet second{"second", {thin.begin() + 40, thin.end()}, {}};
  ImageSet thick_half{"thick", {thick.begin() + 40, thick.end()}, {}};
  EXPECT_LT(fid_between_sets(all, all, 16, 1).value, 1e-3);
  const double halves = fid_between_sets(first, second, 16, 1).value;
  const double changed = fid_between_sets(first, thick_half, 16, 1).value;
  EXPECT_GT(halves, 0.0);
  EXPECT_LT(halves, changed);
}

TEST(FidMatrix, UpperTriangleAndDiagonal) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 1);
  std::vector<FeatureMatrix> feats;
  for (int k = 0; k < 3; ++k) {
    FeatureMatrix f;
    f.label = "s" + std::to_string(k);
    f.values.resize(50, 4);
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < 4; ++j) f.values(i, j) = n(rng) + k;
    }
    feats.push_back(f);
  }
  feats.push_back(feats[0]);
  const auto t = fid_matrix(feats);
  ASSERT_EQ(t.values.size(), 4u);
  EXPECT_EQ(t.pairs.size(), 6u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(t.values[i][i], 0.0);
    for (int j = 0; j < i; ++j) EXPECT_TRUE(std::isnan(t.values[i][j]));
  }
  EXPECT_LT(t.values[0][3], 1e-9);
  EXPECT_LT(t.values[0][1], t.values[0][2]);
  EXPECT_DOUBLE_EQ(t.values[1][2], fid_between(feats[1], feats[2]).value);
  EXPECT_THROW(fid_matrix(std::vector<FeatureMatrix>{feats[0]}), ValidationError);
}

TEST(FeatureFile, RoundTripIsBitExact) {
  TempDir dir;
  std::mt19937_64 rng(2);
  std::normal_distribution<float> n(0, 3);
  FeatureMatrix f;
  f.values.resize(5, 64);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 64; ++j) f.values(i, j) = n(rng);  // exactly representable in binary32
  }
  write_feature_file(dir / "x.s2rf", f);
  EXPECT_EQ(std::filesystem::file_size(dir / "x.s2rf"), 16u + 4u * 5u * 64u);
  const auto back = read_feature_file(dir / "x.s2rf");
  EXPECT_EQ(back.label, "x");
  EXPECT_EQ(back.values, f.values);
}

TEST(FeatureFile, HeaderLayout) {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Constant(2, 3, 1.0);
  const auto bytes = encode_features(f);
  const std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + 20);
  const std::vector<std::uint8_t> expect = {'S', '2', 'R', 'F', 1, 0, 0, 0, 2, 0,
                                            0,   0,   3,   0,   0, 0, 0, 0, 0x80, 0x3f};
  EXPECT_EQ(head, expect);
}

TEST(FeatureFile, Errors) {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Constant(2, 3, 1.0);
  auto bytes = encode_features(f);
  auto expect_error = [](const std::vector<std::uint8_t>& b, const std::string& what) {
    try {
      decode_features(b);
      FAIL() << what;
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find(what), std::string::npos) << e.what();
    }
  };
  auto bad = bytes;
  bad[0] = 'X';
  expect_error(bad, "bad magic");
  expect_error({'S', '2'}, "bad magic");
  bad = bytes;
  bad[4] = 2;
  expect_error(bad, "version unknown");
  bad = bytes;
  bad.pop_back();
  expect_error(bad, "size mismatch");
  bad = bytes;
  bad[8] = 9;
  expect_error(bad, "size mismatch");
}
