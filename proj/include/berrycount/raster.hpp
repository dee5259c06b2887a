// Copyright 2026 The berrycount Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace berrycount {

/// Base class of every error the library raises on bad input data.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent file content (PGM, CSV, manifests).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters: bad dimensions, thresholds out of range, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Class : std::uint8_t { Background = 0, Berry = 1, Edge = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr Class kAllClasses[kNumClasses] = {Class::Background, Class::Berry,
                                                   Class::Edge};

inline constexpr std::string_view class_name(Class c) {
  switch (c) {
    case Class::Background: return "background";
    case Class::Berry: return "berry";
    case Class::Edge: return "edge";
  }
  return "?";
}

struct Pixel {
  int x = 0;  // column
  int y = 0;  // row
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Dense row-major raster. Dimensions are fixed at construction.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw ConfigError("raster dimensions must be positive, got " + std::to_string(width) +
                        "x" + std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool contains(Pixel p) const { return contains(p.x, p.y); }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](Pixel p) { return (*this)(p.x, p.y); }
  const T& operator[](Pixel p) const { return (*this)(p.x, p.y); }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  std::span<const T> row(int y) const {
    return std::span<const T>(data_).subspan(index(0, y), static_cast<std::size_t>(width_));
  }

  bool same_shape(const auto& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using SemanticMask = Raster<Class>;
using InstanceMap = Raster<std::uint16_t>;
using GrayImage = Raster<std::uint8_t>;

/// Annotated berry positions, in annotation order.
using DotSet = std::vector<Pixel>;

// ---------------------------------------------------------------------------
// Binary PGM (P5)

/// Raw PGM content before any class/instance interpretation.
struct Pgm {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint16_t> samples;
};

namespace detail {

inline void skip_pgm_whitespace(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++pos;
    } else {
      break;
    }
  }
}

inline int read_pgm_int(std::string_view bytes, std::size_t& pos, const char* what) {
  skip_pgm_whitespace(bytes, pos);
  const std::size_t start = pos;
  long value = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1'000'000'000L) throw FormatError(std::string("PGM header: ") + what + " too large");
    ++pos;
  }
  if (pos == start) throw FormatError(std::string("PGM header: missing ") + what);
  return static_cast<int>(value);
}

}  // namespace detail

inline Pgm decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("PGM header: expected magic P5");
  }
  std::size_t pos = 2;
  Pgm pgm;
  pgm.width = detail::read_pgm_int(bytes, pos, "width");
  pgm.height = detail::read_pgm_int(bytes, pos, "height");
  pgm.maxval = detail::read_pgm_int(bytes, pos, "maxval");
  if (pgm.width < 1 || pgm.height < 1) throw FormatError("PGM header: zero dimension");
  if (pgm.maxval < 1 || pgm.maxval > 65535) throw FormatError("PGM header: maxval out of range");
  // exactly one whitespace byte separates the header from the raster
  if (pos >= bytes.size() ||
      !(bytes[pos] == ' ' || bytes[pos] == '\n' || bytes[pos] == '\t' || bytes[pos] == '\r')) {
    throw FormatError("PGM header: missing separator before raster");
  }
  ++pos;
  const std::size_t count = static_cast<std::size_t>(pgm.width) * pgm.height;
  const std::size_t bytes_per = pgm.maxval > 255 ? 2 : 1;
  if (bytes.size() - pos < count * bytes_per) {
    throw FormatError("PGM payload truncated: expected " + std::to_string(count * bytes_per) +
                      " bytes, got " + std::to_string(bytes.size() - pos));
  }
  pgm.samples.resize(count);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < count; ++i) {
    pgm.samples[i] = bytes_per == 2 ? static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1])
                                    : static_cast<std::uint16_t>(p[i]);
    if (pgm.samples[i] > pgm.maxval) throw FormatError("PGM sample exceeds maxval");
  }
  return pgm;
}

inline std::string encode_pgm(const Pgm& pgm) {
  std::string out = "P5\n" + std::to_string(pgm.width) + " " + std::to_string(pgm.height) +
                    "\n" + std::to_string(pgm.maxval) + "\n";
  const bool wide = pgm.maxval > 255;
  out.reserve(out.size() + pgm.samples.size() * (wide ? 2 : 1));
  for (std::uint16_t s : pgm.samples) {
    if (wide) out.push_back(static_cast<char>(s >> 8));
    out.push_back(static_cast<char>(s & 0xff));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Semantic masks: 0 = background, 128 = berry, 255 = edge

inline constexpr std::uint8_t class_code(Class c) {
  switch (c) {
    case Class::Background: return 0;
    case Class::Berry: return 128;
    case Class::Edge: return 255;
  }
  return 0;
}

inline bool class_from_code(int code, Class& out) {
  switch (code) {
    case 0: out = Class::Background; return true;
    case 128: out = Class::Berry; return true;
    case 255: out = Class::Edge; return true;
    default: return false;
  }
}

inline SemanticMask decode_semantic_mask(std::string_view bytes) {
  const Pgm pgm = decode_pgm(bytes);
  if (pgm.maxval != 255) throw FormatError("semantic mask: maxval must be 255");
  SemanticMask mask(pgm.width, pgm.height);
  auto px = mask.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (!class_from_code(pgm.samples[i], px[i])) {
      throw FormatError("invalid class value " + std::to_string(pgm.samples[i]) + " at pixel (" +
                        std::to_string(i % pgm.width) + "," + std::to_string(i / pgm.width) + ")");
    }
  }
  return mask;
}

inline std::string encode_semantic_mask(const SemanticMask& mask) {
  Pgm pgm{mask.width(), mask.height(), 255, {}};
  pgm.samples.reserve(mask.size());
  for (Class c : mask.pixels()) pgm.samples.push_back(class_code(c));
  return encode_pgm(pgm);
}

// ---------------------------------------------------------------------------
// Instance maps: 16-bit big-endian ids, 0 = background

inline InstanceMap decode_instance_map(std::string_view bytes) {
  Pgm pgm = decode_pgm(bytes);
  if (pgm.maxval != 65535) throw FormatError("instance map: maxval must be 65535");
  InstanceMap map(pgm.width, pgm.height);
  std::copy(pgm.samples.begin(), pgm.samples.end(), map.pixels().begin());
  return map;
}

inline std::string encode_instance_map(const InstanceMap& map) {
  Pgm pgm{map.width(), map.height(), 65535, {}};
  pgm.samples.assign(map.pixels().begin(), map.pixels().end());
  return encode_pgm(pgm);
}

inline GrayImage decode_gray_image(std::string_view bytes) {
  Pgm pgm = decode_pgm(bytes);
  if (pgm.maxval != 255) throw FormatError("gray image: maxval must be 255");
  GrayImage img(pgm.width, pgm.height);
  std::transform(pgm.samples.begin(), pgm.samples.end(), img.pixels().begin(),
                 [](std::uint16_t s) { return static_cast<std::uint8_t>(s); });
  return img;
}

inline std::string encode_gray_image(const GrayImage& img) {
  Pgm pgm{img.width(), img.height(), 255, {}};
  pgm.samples.assign(img.pixels().begin(), img.pixels().end());
  return encode_pgm(pgm);
}

// ---------------------------------------------------------------------------
// Dot annotations: CSV with header "x,y"

inline DotSet parse_dots(std::string_view text) {
  DotSet dots;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool saw_header = false;
  std::unordered_set<std::uint64_t> seen;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!saw_header) {
      if (line != "x,y") throw FormatError("dots line 1: expected header \"x,y\"");
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    auto parse_int = [&](std::string_view tok) {
      if (tok.empty()) throw FormatError("dots line " + std::to_string(line_no) + ": empty value");
      std::size_t i = 0;
      bool neg = false;
      if (tok[0] == '-') {
        neg = true;
        i = 1;
      }
      if (i == tok.size()) throw FormatError("dots line " + std::to_string(line_no) + ": bad integer");
      long v = 0;
      for (; i < tok.size(); ++i) {
        if (tok[i] < '0' || tok[i] > '9' || v > 100'000'000L) {
          throw FormatError("dots line " + std::to_string(line_no) + ": non-integer token \"" +
                            std::string(tok) + "\"");
        }
        v = v * 10 + (tok[i] - '0');
      }
      return static_cast<int>(neg ? -v : v);
    };
    if (comma == std::string_view::npos) {
      throw FormatError("dots line " + std::to_string(line_no) + ": expected two columns");
    }
    const Pixel p{parse_int(line.substr(0, comma)), parse_int(line.substr(comma + 1))};
    const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
                     static_cast<std::uint32_t>(p.y);
    if (!seen.insert(key).second) {
      throw FormatError("dots line " + std::to_string(line_no) + ": duplicate point");
    }
    dots.push_back(p);
  }
  if (!saw_header && !text.empty()) throw FormatError("dots: missing header");
  return dots;
}

inline std::string format_dots(const DotSet& dots) {
  std::string out = "x,y\n";
  for (const Pixel& p : dots) out += std::to_string(p.x) + "," + std::to_string(p.y) + "\n";
  return out;
}

/// Throws FormatError unless every dot lies inside a width x height raster.
inline void check_dots_in_bounds(const DotSet& dots, int width, int height) {
  for (const Pixel& p : dots) {
    if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
      throw FormatError("dot (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                        ") outside " + std::to_string(width) + "x" + std::to_string(height) +
                        " raster");
    }
  }
}

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace berrycount
