/* Copyright 2026 The WeakCube Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Depth maps and ground masks, with PFM / PGM (P5) serialization.

#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "weakcube/error.hpp"

namespace weakcube {

// Row-major depth in meters; NaN marks pixels without depth.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  DepthMap() = default;
  DepthMap(int w, int h, float fill = std::numeric_limits<float>::quiet_NaN())
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

inline bool is_valid_depth(float d) { return std::isfinite(d) && d > 0.0f; }

struct GroundMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // 0 or 1

  GroundMask() = default;
  GroundMask(int w, int h, bool fill = false)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

  bool at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool on) {
    values[static_cast<std::size_t>(y) * width + x] = on ? 1 : 0;
  }
  double coverage() const {
    if (values.empty()) return 0.0;
    std::size_t on = 0;
    for (auto b : values) on += (b != 0);
    return static_cast<double>(on) / static_cast<double>(values.size());
  }
};

namespace detail {

// Reads one whitespace-delimited header token, skipping '#' comments.
inline std::string read_header_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  // The single whitespace byte after the last header token has been consumed.
  return tok;
}

inline int parse_dimension(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0 || v > (1 << 20)) throw FormatError(what);
    return static_cast<int>(v);
  } catch (const std::logic_error&) {
    throw FormatError(what);
  }
}

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes next to the target and renames, so readers never see a partial file.
inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("short write to " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot write " + path.string());
  }
}

}  // namespace detail

// Grayscale PFM: "Pf\n<w> <h>\n-1.0\n", little-endian float32 rows stored
// bottom row first.
inline std::string encode_pfm(const DepthMap& d) {
  std::ostringstream out;
  out << "Pf\n" << d.width << ' ' << d.height << "\n-1.0\n";
  std::string bytes = out.str();
  const std::size_t header = bytes.size();
  bytes.resize(header + d.values.size() * 4);
  char* dst = bytes.data() + header;
  for (int y = d.height - 1; y >= 0; --y) {
    for (int x = 0; x < d.width; ++x) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(d.at(x, y));
      for (int k = 0; k < 4; ++k) *dst++ = static_cast<char>((bits >> (8 * k)) & 0xFF);
    }
  }
  return bytes;
}

inline DepthMap decode_pfm(const std::string& bytes) {
  std::istringstream in(bytes);
  if (detail::read_header_token(in) != "Pf") throw FormatError("not a grayscale PFM file");
  const int w = detail::parse_dimension(detail::read_header_token(in), "bad PFM width");
  const int h = detail::parse_dimension(detail::read_header_token(in), "bad PFM height");
  double scale = 0.0;
  try {
    scale = std::stod(detail::read_header_token(in));
  } catch (const std::logic_error&) {
    throw FormatError("bad PFM scale");
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw FormatError("bad PFM scale");
  const bool little = scale < 0.0;
  if (!in || in.tellg() < 0) throw FormatError("truncated PFM header");
  const auto offset = static_cast<std::size_t>(in.tellg());
  const std::size_t need = static_cast<std::size_t>(w) * h * 4;
  if (bytes.size() < offset + need) throw FormatError("truncated PFM payload");
  DepthMap d(w, h);
  const auto* src = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) {
      std::uint32_t bits = 0;
      for (int k = 0; k < 4; ++k) {
        const int shift = little ? 8 * k : 8 * (3 - k);
        bits |= static_cast<std::uint32_t>(src[k]) << shift;
      }
      src += 4;
      d.at(x, y) = std::bit_cast<float>(bits);
    }
  }
  return d;
}

inline void write_pfm(const std::filesystem::path& path, const DepthMap& d) {
  detail::write_file(path, encode_pfm(d));
}

inline DepthMap read_pfm(const std::filesystem::path& path) {
  const auto raw = detail::read_file(path);
  return decode_pfm(std::string(raw.begin(), raw.end()));
}

// Binary PGM (P5), maxval 255: 0 = off, 255 = on.
inline std::string encode_pgm(const GroundMask& m) {
  std::ostringstream out;
  out << "P5\n" << m.width << ' ' << m.height << "\n255\n";
  std::string bytes = out.str();
  bytes.reserve(bytes.size() + m.values.size());
  for (auto b : m.values) bytes.push_back(static_cast<char>(b ? 0xFF : 0x00));
  return bytes;
}

inline GroundMask decode_pgm(const std::string& bytes) {
  std::istringstream in(bytes);
  if (detail::read_header_token(in) != "P5") throw FormatError("not a binary PGM file");
  const int w = detail::parse_dimension(detail::read_header_token(in), "bad PGM width");
  const int h = detail::parse_dimension(detail::read_header_token(in), "bad PGM height");
  const int maxval = detail::parse_dimension(detail::read_header_token(in), "bad PGM maxval");
  if (maxval > 255) throw FormatError("16-bit PGM is not supported");
  if (!in || in.tellg() < 0) throw FormatError("truncated PGM header");
  const auto offset = static_cast<std::size_t>(in.tellg());
  const std::size_t need = static_cast<std::size_t>(w) * h;
  if (bytes.size() < offset + need) throw FormatError("truncated PGM payload");
  GroundMask m(w, h);
  for (std::size_t i = 0; i < need; ++i) {
    const auto px = static_cast<unsigned char>(bytes[offset + i]);
    m.values[i] = 2 * px > static_cast<unsigned>(maxval) ? 1 : 0;
  }
  return m;
}

inline void write_pgm(const std::filesystem::path& path, const GroundMask& m) {
  detail::write_file(path, encode_pgm(m));
}

inline GroundMask read_pgm(const std::filesystem::path& path) {
  const auto raw = detail::read_file(path);
  return decode_pgm(std::string(raw.begin(), raw.end()));
}

}  // namespace weakcube
