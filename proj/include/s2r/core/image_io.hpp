#pragma once

#include <png.h>

#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"

namespace s2r {

namespace detail {

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("unreadable file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Image decode_png(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw ValidationError("corrupt stream: " + name + " (" + png.message + ")");
  }
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    throw ValidationError("unsupported bit depth: " + name + " is 16-bit");
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, data.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw ValidationError("corrupt stream: " + name + " (" + msg + ")");
  }
  return Image(static_cast<int>(png.width), static_cast<int>(png.height), channels, std::move(data));
}

// Reads one whitespace-delimited header token, skipping '#' comments.
inline std::string pnm_token(const std::vector<std::uint8_t>& b, std::size_t& pos) {
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < b.size() && !std::isspace(b[pos])) tok.push_back(static_cast<char>(b[pos++]));
  return tok;
}

inline Image decode_pnm(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  std::size_t pos = 0;
  const std::string magic = pnm_token(bytes, pos);
  const int channels = magic == "P6" ? 3 : 1;
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pnm_token(bytes, pos));
    h = std::stoi(pnm_token(bytes, pos));
    maxval = std::stoi(pnm_token(bytes, pos));
  } catch (const std::exception&) {
    throw ValidationError("corrupt stream: " + name + " (bad header)");
  }
  if (maxval > 255) throw ValidationError("unsupported bit depth: " + name + " maxval " + std::to_string(maxval));
  if (w <= 0 || h <= 0 || maxval <= 0) throw ValidationError("corrupt stream: " + name + " (bad header)");
  ++pos;  // single whitespace after maxval
  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() < pos + need) throw ValidationError("corrupt stream: " + name + " (truncated payload)");
  std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  if (maxval != 255) {
    for (auto& v : data) v = clamp_u8(v * 255.0 / maxval);
  }
  return Image(w, h, channels, std::move(data));
}

}  // namespace detail

/// Decodes PNG, binary PGM (P5) or binary PPM (P6). Only 8-bit samples are
/// accepted; format is sniffed from the leading bytes, not the extension.
inline Image load_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_bytes(path);
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) {
    return detail::decode_png(bytes, path.string());
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return detail::decode_pnm(bytes, path.string());
  }
  throw ValidationError("corrupt stream: " + path.string() + " (unrecognized format)");
}

/// Encodes by extension: .pgm/.ppm as binary PNM, everything else as PNG.
inline void save_image(const Image& img, const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm" || ext == ".ppm") {
    require((ext == ".pgm") == (img.channels() == 1), "PNM extension does not match channel count");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("unwritable output path: " + path.string());
    out << (img.channels() == 1 ? "P5" : "P6") << '\n'
        << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()), static_cast<std::streamsize>(img.size()));
    if (!out) throw ValidationError("unwritable output path: " + path.string());
    return;
  }
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, img.data().data(), 0, nullptr)) {
    throw ValidationError("unwritable output path: " + path.string() + " (" + png.message + ")");
  }
}

}  // namespace s2r
