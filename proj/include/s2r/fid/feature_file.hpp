#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/fid/features.hpp"

// S2RF feature file: "S2RF", u32 version, u32 n, u32 d, then n*d binary32
// values row-major. All integers and floats little-endian.
namespace s2r::fid {

inline constexpr std::array<std::uint8_t, 4> kFeatureMagic = {0x53, 0x32, 0x52, 0x46};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 16;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_features(const FeatureMatrix& f) {
  std::vector<std::uint8_t> out(kFeatureMagic.begin(), kFeatureMagic.end());
  detail::put_u32(out, kFeatureVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(f.n()));
  detail::put_u32(out, static_cast<std::uint32_t>(f.d()));
  out.reserve(kFeatureHeaderBytes + 4 * static_cast<std::size_t>(f.n() * f.d()));
  for (Eigen::Index i = 0; i < f.n(); ++i) {
    for (Eigen::Index j = 0; j < f.d(); ++j) {
      detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(f.values(i, j))));
    }
  }
  return out;
}

inline FeatureMatrix decode_features(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kFeatureHeaderBytes || !std::equal(kFeatureMagic.begin(), kFeatureMagic.end(), bytes.begin())) {
    throw ValidationError("bad magic: not an S2RF feature file");
  }
  const std::uint32_t version = detail::get_u32(bytes.data() + 4);
  if (version != kFeatureVersion) throw ValidationError("version unknown: " + std::to_string(version));
  const std::uint64_t n = detail::get_u32(bytes.data() + 8);
  const std::uint64_t d = detail::get_u32(bytes.data() + 12);
  if (kFeatureHeaderBytes + 4 * n * d != bytes.size()) {
    throw ValidationError("size mismatch: header declares " + std::to_string(n) + "x" + std::to_string(d) +
                          " but payload is " + std::to_string(bytes.size() - kFeatureHeaderBytes) + " bytes");
  }
  FeatureMatrix f;
  f.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const std::uint8_t* p = bytes.data() + kFeatureHeaderBytes;
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < d; ++j, p += 4) {
      f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::bit_cast<float>(detail::get_u32(p));
    }
  }
  return f;
}

inline void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& f) {
  const auto bytes = encode_features(f);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("unwritable output path: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("unwritable output path: " + path.string());
}

inline FeatureMatrix read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("unreadable file: " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  FeatureMatrix f = decode_features(bytes);
  f.label = path.stem().string();
  return f;
}

}  // namespace s2r::fid
