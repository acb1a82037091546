#pragma once

#include <cstdint>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"

namespace s2r::sim {

/// Image degradation applied after rendering: Gaussian blur, contrast about
/// mid-grey, additive Gaussian noise.
struct StylePreset {
  std::string name;
  double blur_sigma = 0.0;   // px
  double contrast = 1.0;
  double noise_sigma = 0.0;  // 8-bit levels

  void validate() const {
    require(blur_sigma >= 0 && contrast >= 0 && noise_sigma >= 0, "style parameters must be nonnegative");
  }

  static StylePreset crisp() { return {"crisp", 0.0, 1.0, 0.0}; }
  static StylePreset soft() { return {"soft", 1.5, 0.7, 4.0}; }

  static StylePreset by_name(const std::string& name) {
    if (name == "crisp") return crisp();
    if (name == "soft") return soft();
    throw ValidationError("unknown style preset '" + name + "' (expected crisp or soft)");
  }
};

inline Image apply_style(const Image& img, const StylePreset& preset, std::uint64_t seed) {
  preset.validate();
  Image out = gaussian_blur(img, preset.blur_sigma);
  if (preset.contrast == 1.0 && preset.noise_sigma == 0.0) return out;
  auto d = out.data();
  if (preset.noise_sigma > 0.0) {
    boost::random::mt19937_64 rng(seed);
    boost::random::normal_distribution<double> noise(0.0, preset.noise_sigma);
    for (auto& v : d) v = clamp_u8(128.0 + preset.contrast * (v - 128.0) + noise(rng));
  } else {
    for (auto& v : d) v = clamp_u8(128.0 + preset.contrast * (v - 128.0));
  }
  return out;
}

}  // namespace s2r::sim
