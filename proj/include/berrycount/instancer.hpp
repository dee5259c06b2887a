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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "berrycount/raster.hpp"

namespace berrycount {

struct PointF {
  double x = 0.0;
  double y = 0.0;
};

/// One berry candidate: a maximal 4-connected set of Berry pixels plus the
/// shape descriptors the filters and metrics consume.
///
/// Components loaded from a descriptor table carry no pixels.
struct Component {
  int id = 0;
  std::vector<Pixel> pixels;  // raster order
  long area_px = 0;
  PointF centroid;
  double a_maj = 0.0;  // full axis lengths of the equal-covariance ellipse
  double a_min = 0.0;
  double enclosure = 0.0;  // share of boundary pixels touching Edge
};

/// Second-moment ellipse axes of a pixel set.
///
/// Each pixel is a unit square, so its own variance 1/12 is added on both axes.
/// Axes are 4 * sqrt(eigenvalue), which is the diameter for a filled disk.
struct MomentAxes {
  PointF centroid;
  double mu20 = 0.0;
  double mu02 = 0.0;
  double mu11 = 0.0;
  double a_maj = 0.0;
  double a_min = 0.0;
};

inline MomentAxes moment_axes(std::span<const Pixel> pixels) {
  MomentAxes m;
  const double n = static_cast<double>(pixels.size());
  for (const Pixel& p : pixels) {
    m.centroid.x += p.x;
    m.centroid.y += p.y;
  }
  m.centroid.x /= n;
  m.centroid.y /= n;
  if (pixels.size() == 1) {
    m.a_maj = m.a_min = 1.0;
    return m;
  }
  for (const Pixel& p : pixels) {
    const double dx = p.x - m.centroid.x;
    const double dy = p.y - m.centroid.y;
    m.mu20 += dx * dx;
    m.mu02 += dy * dy;
    m.mu11 += dx * dy;
  }
  m.mu20 = m.mu20 / n + 1.0 / 12.0;
  m.mu02 = m.mu02 / n + 1.0 / 12.0;
  m.mu11 /= n;
  const double mean = 0.5 * (m.mu20 + m.mu02);
  const double half_diff = 0.5 * (m.mu20 - m.mu02);
  const double root = std::sqrt(half_diff * half_diff + m.mu11 * m.mu11);
  const double l1 = mean + root;
  const double l2 = std::max(0.0, mean - root);
  m.a_maj = 4.0 * std::sqrt(l1);
  m.a_min = 4.0 * std::sqrt(l2);
  return m;
}

/// Fills area, centroid, axes and enclosure for `pixels` within `mask`.
///
/// Boundary pixels are members with at least one 4-neighbor outside the set
/// (the image border counts as outside). Enclosure is the fraction of them
/// with an Edge pixel anywhere in their 8-neighborhood.
inline Component compute_descriptors(std::span<const Pixel> pixels, const SemanticMask& mask,
                                     int id = 1) {
  if (pixels.empty()) throw ConfigError("compute_descriptors: empty pixel set");
  Component c;
  c.id = id;
  c.pixels.assign(pixels.begin(), pixels.end());
  std::sort(c.pixels.begin(), c.pixels.end(),
            [](Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  c.area_px = static_cast<long>(c.pixels.size());

  const MomentAxes m = moment_axes(c.pixels);
  c.centroid = m.centroid;
  c.a_maj = m.a_maj;
  c.a_min = m.a_min;

  int x0 = c.pixels.front().x, x1 = x0, y0 = c.pixels.front().y, y1 = c.pixels.back().y;
  for (const Pixel& p : c.pixels) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
  }
  // membership bitmap with a one-pixel margin
  const int bw = x1 - x0 + 3;
  const int bh = y1 - y0 + 3;
  std::vector<std::uint8_t> member(static_cast<std::size_t>(bw) * bh, 0);
  auto at = [&](int x, int y) -> std::uint8_t& {
    return member[static_cast<std::size_t>(y - y0 + 1) * bw + (x - x0 + 1)];
  };
  for (const Pixel& p : c.pixels) at(p.x, p.y) = 1;

  long boundary = 0;
  long enclosed = 0;
  for (const Pixel& p : c.pixels) {
    const bool is_boundary = !at(p.x - 1, p.y) || !at(p.x + 1, p.y) || !at(p.x, p.y - 1) ||
                             !at(p.x, p.y + 1);
    if (!is_boundary) continue;
    ++boundary;
    bool touches_edge = false;
    for (int dy = -1; dy <= 1 && !touches_edge; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = p.x + dx;
        const int ny = p.y + dy;
        if (mask.contains(nx, ny) && mask(nx, ny) == Class::Edge) {
          touches_edge = true;
          break;
        }
      }
    }
    enclosed += touches_edge;
  }
  c.enclosure = boundary == 0 ? 0.0 : static_cast<double>(enclosed) / static_cast<double>(boundary);
  return c;
}

/// Per-pixel component label (0 = none) for 4-connected Berry regions, ids in
/// raster-scan order of each region's first pixel. Returns the number of ids.
inline int label_berry_regions(const SemanticMask& mask, Raster<std::int32_t>& labels) {
  labels = Raster<std::int32_t>(mask.width(), mask.height(), 0);
  int next = 0;
  std::vector<Pixel> stack;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y) != Class::Berry || labels(x, y) != 0) continue;
      ++next;
      labels(x, y) = next;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        const Pixel nbrs[4] = {{p.x - 1, p.y}, {p.x + 1, p.y}, {p.x, p.y - 1}, {p.x, p.y + 1}};
        for (const Pixel& q : nbrs) {
          if (mask.contains(q) && mask[q] == Class::Berry && labels[q] == 0) {
            labels[q] = next;
            stack.push_back(q);
          }
        }
      }
    }
  }
  return next;
}

/// Maximal 4-connected Berry regions with descriptors, in raster-scan order.
inline std::vector<Component> connected_components(const SemanticMask& mask) {
  Raster<std::int32_t> labels;
  const int n = label_berry_regions(mask, labels);
  std::vector<std::vector<Pixel>> sets(static_cast<std::size_t>(n));
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (const int l = labels(x, y); l != 0) sets[static_cast<std::size_t>(l - 1)].push_back({x, y});
    }
  }
  std::vector<Component> out;
  out.reserve(sets.size());
  for (int i = 0; i < n; ++i) out.push_back(compute_descriptors(sets[static_cast<std::size_t>(i)], mask, i + 1));
  return out;
}

// ---------------------------------------------------------------------------
// Descriptor table: id,area,cx,cy,a_maj,a_min,enclosure (4 decimals)

inline std::string format_components(std::span<const Component> comps) {
  std::string out = "id,area,cx,cy,a_maj,a_min,enclosure\n";
  char buf[256];
  for (const Component& c : comps) {
    std::snprintf(buf, sizeof buf, "%d,%ld,%.4f,%.4f,%.4f,%.4f,%.4f\n", c.id, c.area_px,
                  c.centroid.x, c.centroid.y, c.a_maj, c.a_min, c.enclosure);
    out += buf;
  }
  return out;
}

inline std::vector<Component> parse_components(std::string_view text) {
  std::vector<Component> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "id,area,cx,cy,a_maj,a_min,enclosure") {
        throw FormatError("components line 1: unexpected header");
      }
      continue;
    }
    if (line.empty()) continue;
    Component c;
    int consumed = 0;
    if (std::sscanf(line.c_str(), "%d,%ld,%lf,%lf,%lf,%lf,%lf%n", &c.id, &c.area_px,
                    &c.centroid.x, &c.centroid.y, &c.a_maj, &c.a_min, &c.enclosure,
                    &consumed) != 7 ||
        static_cast<std::size_t>(consumed) != line.size()) {
      throw FormatError("components line " + std::to_string(line_no) + ": malformed row");
    }
    if (c.area_px < 1 || c.enclosure < 0.0 || c.enclosure > 1.0 || c.a_min < 0.0 ||
        c.a_min > c.a_maj + 1e-4) {
      throw FormatError("components line " + std::to_string(line_no) + ": invalid descriptor");
    }
    out.push_back(std::move(c));
  }
  if (line_no == 0) throw FormatError("components: missing header");
  return out;
}

}  // namespace berrycount
