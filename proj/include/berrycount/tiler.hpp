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
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "berrycount/raster.hpp"

namespace berrycount {

/// Overlapping patch layout over one image. Origins are row-major.
struct PatchGrid {
  int image_w = 0;
  int image_h = 0;
  int patch_w = 0;
  int patch_h = 0;
  int stride_x = 0;
  int stride_y = 0;
  std::vector<Pixel> origins;

  std::size_t size() const { return origins.size(); }
  friend bool operator==(const PatchGrid&, const PatchGrid&) = default;
};

namespace detail {

inline std::vector<int> axis_origins(int image, int patch, int stride) {
  std::vector<int> out;
  for (int o = 0; o + patch <= image; o += stride) out.push_back(o);
  if (out.back() + patch < image) out.push_back(image - patch);
  return out;
}

}  // namespace detail

/// Plans patches of patch_w x patch_h with the given fractional overlap.
/// Strides are round(patch * (1 - overlap)); the last patch on each axis is
/// pulled back to end flush with the image instead of padding.
inline PatchGrid plan_grid(int image_w, int image_h, int patch_w, int patch_h,
                           double overlap_fraction) {
  if (patch_w < 1 || patch_h < 1) throw ConfigError("patch dimensions must be positive");
  if (patch_w > image_w || patch_h > image_h) {
    throw ConfigError("patch " + std::to_string(patch_w) + "x" + std::to_string(patch_h) +
                      " larger than image " + std::to_string(image_w) + "x" +
                      std::to_string(image_h));
  }
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    throw ConfigError("overlap fraction must lie in [0, 1)");
  }
  PatchGrid g;
  g.image_w = image_w;
  g.image_h = image_h;
  g.patch_w = patch_w;
  g.patch_h = patch_h;
  g.stride_x = std::max(1, static_cast<int>(std::floor(patch_w * (1.0 - overlap_fraction) + 0.5)));
  g.stride_y = std::max(1, static_cast<int>(std::floor(patch_h * (1.0 - overlap_fraction) + 0.5)));
  const auto xs = detail::axis_origins(image_w, patch_w, g.stride_x);
  const auto ys = detail::axis_origins(image_h, patch_h, g.stride_y);
  g.origins.reserve(xs.size() * ys.size());
  for (int y : ys)
    for (int x : xs) g.origins.push_back({x, y});
  return g;
}

/// Number of grid patches covering pixel (x, y).
inline int coverage(const PatchGrid& g, int x, int y) {
  int n = 0;
  for (const Pixel& o : g.origins) {
    n += x >= o.x && x < o.x + g.patch_w && y >= o.y && y < o.y + g.patch_h;
  }
  return n;
}

inline void validate_grid(const PatchGrid& g) {
  if (g.origins.empty()) throw FormatError("grid has no patches");
  for (const Pixel& o : g.origins) {
    if (o.x < 0 || o.y < 0 || o.x + g.patch_w > g.image_w || o.y + g.patch_h > g.image_h) {
      throw FormatError("grid origin (" + std::to_string(o.x) + "," + std::to_string(o.y) +
                        ") puts patch outside the image");
    }
  }
}

template <typename T>
Raster<T> crop(const Raster<T>& in, Pixel origin, int w, int h) {
  Raster<T> out(w, h);
  for (int y = 0; y < h; ++y) {
    const auto src = in.row(origin.y + y).subspan(static_cast<std::size_t>(origin.x),
                                                  static_cast<std::size_t>(w));
    std::copy(src.begin(), src.end(), out.pixels().begin() + out.index(0, y));
  }
  return out;
}

/// Cuts `image` into the grid's patches, in origin order.
template <typename T>
std::vector<Raster<T>> extract(const Raster<T>& image, const PatchGrid& grid) {
  if (image.width() != grid.image_w || image.height() != grid.image_h) {
    throw FormatError("extract: image is " + std::to_string(image.width()) + "x" +
                      std::to_string(image.height()) + " but grid was planned for " +
                      std::to_string(grid.image_w) + "x" + std::to_string(grid.image_h));
  }
  validate_grid(grid);
  std::vector<Raster<T>> out;
  out.reserve(grid.size());
  for (const Pixel& o : grid.origins) out.push_back(crop(image, o, grid.patch_w, grid.patch_h));
  return out;
}

/// Per-pixel class votes, indexed by Class.
struct VoteField {
  Raster<std::array<std::uint16_t, kNumClasses>> votes;

  int total(int x, int y) const {
    const auto& v = votes(x, y);
    return v[0] + v[1] + v[2];
  }
};

namespace detail {

inline void check_patches(std::span<const SemanticMask> patches, const PatchGrid& grid) {
  validate_grid(grid);
  if (patches.size() != grid.size()) {
    throw FormatError("stitch: " + std::to_string(patches.size()) + " patch masks for " +
                      std::to_string(grid.size()) + " grid origins");
  }
  for (std::size_t i = 0; i < patches.size(); ++i) {
    if (patches[i].width() != grid.patch_w || patches[i].height() != grid.patch_h) {
      throw FormatError("stitch: patch " + std::to_string(i) + " is " +
                        std::to_string(patches[i].width()) + "x" +
                        std::to_string(patches[i].height()) + ", grid expects " +
                        std::to_string(grid.patch_w) + "x" + std::to_string(grid.patch_h));
    }
  }
}

// Accumulates votes for output rows [row_begin, row_end).
inline void accumulate_rows(std::span<const SemanticMask> patches, const PatchGrid& grid,
                            VoteField& field, int row_begin, int row_end) {
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const Pixel o = grid.origins[i];
    const int y0 = std::max(row_begin, o.y);
    const int y1 = std::min(row_end, o.y + grid.patch_h);
    for (int y = y0; y < y1; ++y) {
      const auto src = patches[i].row(y - o.y);
      for (int x = 0; x < grid.patch_w; ++x) {
        ++field.votes(o.x + x, y)[static_cast<std::size_t>(src[static_cast<std::size_t>(x)])];
      }
    }
  }
}

template <typename Fn>
void for_row_bands(int rows, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(1, rows));
  if (threads == 1) {
    fn(0, rows);
    return;
  }
  std::vector<std::thread> pool;
  const int band = (rows + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int b = t * band;
    const int e = std::min(rows, b + band);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline VoteField accumulate_votes(std::span<const SemanticMask> patches, const PatchGrid& grid,
                                  int threads = 1) {
  detail::check_patches(patches, grid);
  VoteField field{Raster<std::array<std::uint16_t, kNumClasses>>(grid.image_w, grid.image_h,
                                                                 {0, 0, 0})};
  detail::for_row_bands(grid.image_h, threads, [&](int b, int e) {
    detail::accumulate_rows(patches, grid, field, b, e);
  });
  return field;
}

/// Strict plurality; ties resolve Edge > Berry > Background.
inline Class elect(const std::array<std::uint16_t, kNumClasses>& v) {
  Class best = Class::Edge;
  for (Class c : {Class::Berry, Class::Background}) {
    if (v[static_cast<std::size_t>(c)] > v[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

/// Majority-vote reassembly of per-patch masks into a full-resolution mask.
/// Output is independent of patch order and of the thread count.
inline SemanticMask stitch(std::span<const SemanticMask> patches, const PatchGrid& grid,
                           int image_w, int image_h, int threads = 1) {
  if (image_w != grid.image_w || image_h != grid.image_h) {
    throw FormatError("stitch: target size differs from grid image size");
  }
  const VoteField field = accumulate_votes(patches, grid, threads);
  SemanticMask out(image_w, image_h);
  std::atomic<long> uncovered{0};
  detail::for_row_bands(image_h, threads, [&](int b, int e) {
    long missing = 0;
    for (int y = b; y < e; ++y) {
      for (int x = 0; x < image_w; ++x) {
        const auto& v = field.votes(x, y);
        missing += v[0] + v[1] + v[2] == 0;
        out(x, y) = elect(v);
      }
    }
    uncovered += missing;
  });
  if (uncovered > 0) {
    throw FormatError("stitch: " + std::to_string(uncovered.load()) +
                      " pixels not covered by any patch");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grid manifest
//
//   berrycount-grid 1
//   image <w> <h>
//   patch <w> <h>
//   stride <sx> <sy>
//   origins <n>
//   <x> <y>          (n lines, row-major)

inline std::string format_grid(const PatchGrid& g) {
  std::ostringstream out;
  out << "berrycount-grid 1\n"
      << "image " << g.image_w << ' ' << g.image_h << '\n'
      << "patch " << g.patch_w << ' ' << g.patch_h << '\n'
      << "stride " << g.stride_x << ' ' << g.stride_y << '\n'
      << "origins " << g.origins.size() << '\n';
  for (const Pixel& o : g.origins) out << o.x << ' ' << o.y << '\n';
  return out.str();
}

inline PatchGrid parse_grid(const std::string& text) {
  std::istringstream in(text);
  auto expect = [&](const char* key) {
    std::string k;
    if (!(in >> k) || k != key) throw FormatError(std::string("grid manifest: expected '") + key + "'");
  };
  auto number = [&](const char* what) {
    long v = 0;
    if (!(in >> v) || v < 0 || v > 1'000'000) {
      throw FormatError(std::string("grid manifest: bad ") + what);
    }
    return static_cast<int>(v);
  };
  expect("berrycount-grid");
  if (number("version") != 1) throw FormatError("grid manifest: unsupported version");
  PatchGrid g;
  expect("image");
  g.image_w = number("image width");
  g.image_h = number("image height");
  expect("patch");
  g.patch_w = number("patch width");
  g.patch_h = number("patch height");
  expect("stride");
  g.stride_x = number("stride x");
  g.stride_y = number("stride y");
  expect("origins");
  const int n = number("origin count");
  g.origins.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int x = number("origin x");
    const int y = number("origin y");
    g.origins.push_back({x, y});
  }
  if (g.patch_w < 1 || g.patch_h < 1) throw FormatError("grid manifest: zero patch size");
  validate_grid(g);
  return g;
}

}  // namespace berrycount
