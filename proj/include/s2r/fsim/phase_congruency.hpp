#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"

namespace s2r::fsim {

/// Constants for the FSIM similarity and the log-Gabor filter bank behind the
/// phase-congruency map.
struct FsimParams {
  double t1 = 0.85;   // phase-congruency similarity constant
  double t2 = 160.0;  // gradient similarity constant
  int scales = 4;
  int orientations = 4;
  double min_wavelength = 6.0;
  double scale_mult = 2.0;
  double sigma_on_f = 0.55;
  double noise_k = 2.0;

  void validate() const {
    require(t1 > 0 && t2 > 0 && min_wavelength > 0 && scale_mult > 0 && sigma_on_f > 0 && noise_k > 0,
            "FSIM parameters must be positive");
    require(scales >= 2, "FSIM needs at least 2 scales");
    require(orientations >= 2, "FSIM needs at least 2 orientations");
    require(sigma_on_f < 1.0, "sigma_on_f must be below 1");
  }
};

inline constexpr int kMinPcSide = 16;

namespace detail {

using cplx = std::complex<double>;

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place 2-D DFT over a rows x cols row-major complex buffer. FFTW's planner
// is not thread-safe, so only planning is serialized.
inline void fft2(std::vector<cplx>& buf, int rows, int cols, int sign) {
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(rows, cols, data, data, sign, FFTW_ESTIMATE);
  }
  if (!plan) throw ComputationError("FFT planning failed");
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

// Normalized frequency of DFT index k in a length-n transform, matching the
// shifted grids of the reference phase-congruency code (odd n uses n-1).
inline double grid_freq(int k, int n) {
  if (n % 2 == 0) return static_cast<double>(k < n / 2 ? k : k - n) / n;
  return static_cast<double>(k <= (n - 1) / 2 ? k : k - n) / (n - 1);
}

// Spectrum of the periodic component of the image (periodic + smooth
// decomposition). Removes the spurious cross-shaped edges the implicit
// periodic extension would otherwise add at the image borders.
inline std::vector<cplx> periodic_spectrum(const Plane& im) {
  const int rows = im.height, cols = im.width;
  std::vector<cplx> f(static_cast<std::size_t>(rows) * cols);
  std::vector<cplx> v(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = im.values[i];
  auto at = [cols](int r, int c) { return static_cast<std::size_t>(r) * cols + c; };
  for (int c = 0; c < cols; ++c) {
    const double d = im(c, rows - 1) - im(c, 0);
    v[at(0, c)] += d;
    v[at(rows - 1, c)] -= d;
  }
  for (int r = 0; r < rows; ++r) {
    const double d = im(cols - 1, r) - im(0, r);
    v[at(r, 0)] += d;
    v[at(r, cols - 1)] -= d;
  }
  fft2(f, rows, cols, FFTW_FORWARD);
  fft2(v, rows, cols, FFTW_FORWARD);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int r = 0; r < rows; ++r) {
    const double cr = 2.0 * std::cos(two_pi * r / rows);
    for (int c = 0; c < cols; ++c) {
      const double denom = cr + 2.0 * std::cos(two_pi * c / cols) - 4.0;
      if (r == 0 && c == 0) continue;
      f[at(r, c)] -= v[at(r, c)] / denom;
    }
  }
  return f;
}

}  // namespace detail

/// Log-Gabor filter bank for one image size. Filters and the noise-model
/// constants depend only on size and parameters, so a bank is reused across
/// every image of a set.
class LogGaborBank {
 public:
  LogGaborBank(int width, int height, const FsimParams& p) : width_(width), height_(height), params_(p) {
    p.validate();
    if (std::min(width, height) < kMinPcSide) {
      throw ValidationError("image too small for phase congruency: " + std::to_string(width) + "x" +
                            std::to_string(height) + " (minimum side " + std::to_string(kMinPcSide) + ")");
    }
    const int rows = height, cols = width;
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    std::vector<double> radius(n), sin_t(n), cos_t(n), lowpass(n);
    for (int r = 0; r < rows; ++r) {
      const double y = detail::grid_freq(r, rows);
      for (int c = 0; c < cols; ++c) {
        const double x = detail::grid_freq(c, cols);
        const std::size_t i = static_cast<std::size_t>(r) * cols + c;
        radius[i] = std::sqrt(x * x + y * y);
        const double theta = std::atan2(-y, x);
        sin_t[i] = std::sin(theta);
        cos_t[i] = std::cos(theta);
        // Butterworth low-pass, cutoff 0.45, order 15.
        lowpass[i] = 1.0 / (1.0 + std::pow(radius[i] / 0.45, 30));
      }
    }
    radius[0] = 1.0;

    const double log_sigma = std::log(p.sigma_on_f);
    std::vector<std::vector<double>> log_gabor(p.scales, std::vector<double>(n));
    for (int s = 0; s < p.scales; ++s) {
      const double fo = 1.0 / (p.min_wavelength * std::pow(p.scale_mult, s));
      for (std::size_t i = 0; i < n; ++i) {
        const double l = std::log(radius[i] / fo);
        log_gabor[s][i] = std::exp(-(l * l) / (2.0 * log_sigma * log_sigma)) * lowpass[i];
      }
      log_gabor[s][0] = 0.0;
    }

    const double theta_sigma = std::numbers::pi / p.orientations / 1.2;
    filters_.assign(static_cast<std::size_t>(p.orientations) * p.scales, {});
    orient_.resize(p.orientations);
    for (int o = 0; o < p.orientations; ++o) {
      const double angle = o * std::numbers::pi / p.orientations;
      const double ca = std::cos(angle), sa = std::sin(angle);
      std::vector<double> spread(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double ds = sin_t[i] * ca - cos_t[i] * sa;
        const double dc = cos_t[i] * ca + sin_t[i] * sa;
        const double dtheta = std::abs(std::atan2(ds, dc));
        spread[i] = std::exp(-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma));
      }
      // Spatial-domain filters feed the expected noise energy.
      std::vector<std::vector<double>> spatial(p.scales, std::vector<double>(n));
      for (int s = 0; s < p.scales; ++s) {
        auto& f = filters_[index(s, o)];
        f.resize(n);
        std::vector<detail::cplx> buf(n);
        for (std::size_t i = 0; i < n; ++i) {
          f[i] = log_gabor[s][i] * spread[i];
          buf[i] = f[i];
        }
        if (s == 0) {
          double em = 0.0;
          for (double v : f) em += v * v;
          orient_[o].em_n = em;
        }
        detail::fft2(buf, rows, cols, FFTW_BACKWARD);
        const double norm = std::sqrt(static_cast<double>(n)) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) spatial[s][i] = buf[i].real() * norm;
      }
      double sum_an2 = 0.0, sum_aiaj = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (int s = 0; s < p.scales; ++s) {
          sum_an2 += spatial[s][i] * spatial[s][i];
          for (int t = s + 1; t < p.scales; ++t) sum_aiaj += spatial[s][i] * spatial[t][i];
        }
      }
      orient_[o].sum_an2 = sum_an2;
      orient_[o].sum_aiaj = sum_aiaj;
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  const FsimParams& params() const { return params_; }
  const std::vector<double>& filter(int scale, int orientation) const { return filters_[index(scale, orientation)]; }

  struct OrientationNoise {
    double em_n = 0.0;      // energy of the smallest-scale filter
    double sum_an2 = 0.0;   // sum over scales of squared spatial filters
    double sum_aiaj = 0.0;  // cross terms between scales
  };
  const OrientationNoise& noise(int orientation) const { return orient_[orientation]; }

 private:
  std::size_t index(int s, int o) const { return static_cast<std::size_t>(o) * params_.scales + s; }

  int width_;
  int height_;
  FsimParams params_;
  std::vector<std::vector<double>> filters_;
  std::vector<OrientationNoise> orient_;
};

inline constexpr double kPcEpsilon = 1e-4;

/// Phase congruency in [0, 1]: per-orientation local energy minus an
/// estimated noise threshold, summed over orientations and divided by the
/// summed filter amplitude.
inline Plane phase_congruency(const Plane& im, const LogGaborBank& bank) {
  require(im.width == bank.width() && im.height == bank.height(), "filter bank size does not match image");
  const FsimParams& p = bank.params();
  const int rows = im.height, cols = im.width;
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  const auto spectrum = detail::periodic_spectrum(im);

  std::vector<double> energy_all(n, 0.0), an_all(n, 0.0);
  std::vector<detail::cplx> buf(n);
  std::vector<std::vector<detail::cplx>> eo(p.scales, std::vector<detail::cplx>(n));
  std::vector<double> sq(n);
  for (int o = 0; o < p.orientations; ++o) {
    std::vector<double> sum_e(n, 0.0), sum_o(n, 0.0), sum_an(n, 0.0);
    for (int s = 0; s < p.scales; ++s) {
      const auto& f = bank.filter(s, o);
      for (std::size_t i = 0; i < n; ++i) buf[i] = spectrum[i] * f[i];
      detail::fft2(buf, rows, cols, FFTW_BACKWARD);
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const detail::cplx v = buf[i] * inv_n;
        eo[s][i] = v;
        sum_an[i] += std::sqrt(std::norm(v));
        sum_e[i] += v.real();
        sum_o[i] += v.imag();
      }
    }
    std::vector<double> energy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x_energy = std::sqrt(sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]) + kPcEpsilon;
      const double mean_e = sum_e[i] / x_energy, mean_o = sum_o[i] / x_energy;
      double e = 0.0;
      for (int s = 0; s < p.scales; ++s) {
        const double re = eo[s][i].real(), im_ = eo[s][i].imag();
        e += re * mean_e + im_ * mean_o - std::abs(re * mean_o - im_ * mean_e);
      }
      energy[i] = e;
    }

    // Noise from the median response of the smallest scale (Rayleigh model).
    for (std::size_t i = 0; i < n; ++i) sq[i] = std::norm(eo[0][i]);
    std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(n / 2), sq.end());
    double median = sq[n / 2];
    if (n % 2 == 0) median = 0.5 * (median + *std::max_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(n / 2)));
    const double mean_e2n = -median / std::log(0.5);
    const auto& nz = bank.noise(o);
    const double noise_power = mean_e2n / nz.em_n;
    const double est_noise_energy2 = 2.0 * noise_power * nz.sum_an2 + 4.0 * noise_power * nz.sum_aiaj;
    const double tau = std::sqrt(std::max(0.0, est_noise_energy2) / 2.0);
    const double est_noise_energy = tau * std::sqrt(std::numbers::pi / 2.0);
    const double est_noise_sigma = std::sqrt((2.0 - std::numbers::pi / 2.0) * tau * tau);
    const double threshold = (est_noise_energy + p.noise_k * est_noise_sigma) / 1.7;

    for (std::size_t i = 0; i < n; ++i) {
      energy_all[i] += std::max(energy[i] - threshold, 0.0);
      an_all[i] += sum_an[i];
    }
  }
  Plane pc(cols, rows);
  for (std::size_t i = 0; i < n; ++i) pc.values[i] = std::clamp(energy_all[i] / (an_all[i] + kPcEpsilon), 0.0, 1.0);
  return pc;
}

inline Plane phase_congruency(const Image& img, const FsimParams& p = {}) {
  require(img.channels() == 1, "phase_congruency expects a 1-channel image");
  const LogGaborBank bank(img.width(), img.height(), p);
  return phase_congruency(to_plane(img), bank);
}

}  // namespace s2r::fsim
