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

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "berrycount/raster.hpp"
#include "berrycount/rng.hpp"

namespace berrycount {

/// Width in pixels of the synthesized edge band around each instance.
struct EdgeWidth {
  int pixels = 2;

  constexpr explicit EdgeWidth(int w = 2) : pixels(w) {
    if (w < 1) throw ConfigError("edge width must be >= 1");
  }
};

/// Pixels that survive `steps` per-instance erosions with the 4-neighborhood
/// element. A pixel survives a step when it and all four neighbors were alive
/// and carry the same id; out-of-bounds neighbors count as foreign.
inline Raster<std::uint8_t> instance_cores(const InstanceMap& inst, int steps) {
  const int w = inst.width();
  const int h = inst.height();
  Raster<std::uint8_t> alive(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) alive(x, y) = inst(x, y) != 0;

  Raster<std::uint8_t> next = alive;
  for (int step = 0; step < steps; ++step) {
    bool any = false;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!alive(x, y)) {
          next(x, y) = 0;
          continue;
        }
        const auto id = inst(x, y);
        const bool keep = x > 0 && y > 0 && x + 1 < w && y + 1 < h &&  //
                          alive(x - 1, y) && inst(x - 1, y) == id &&    //
                          alive(x + 1, y) && inst(x + 1, y) == id &&    //
                          alive(x, y - 1) && inst(x, y - 1) == id &&    //
                          alive(x, y + 1) && inst(x, y + 1) == id;
        next(x, y) = keep;
        any = any || keep;
      }
    }
    std::swap(alive, next);
    if (!any) break;
  }
  return alive;
}

/// Berry/edge/background label synthesis from an instance map.
///
/// Each instance loses a `w`-pixel internal band to Edge; what survives the
/// erosion is Berry. Instances thinner than 2w+1 end up entirely Edge. Because
/// erosion is per instance, two touching instances always have an Edge band
/// between their cores.
inline SemanticMask synthesize_labels(const InstanceMap& inst, EdgeWidth w) {
  const auto cores = instance_cores(inst, w.pixels);
  SemanticMask mask(inst.width(), inst.height(), Class::Background);
  auto out = mask.pixels();
  auto ids = inst.pixels();
  auto core = cores.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (ids[i] != 0) out[i] = core[i] ? Class::Berry : Class::Edge;
  }
  return mask;
}

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

/// One dot per instance id, in ascending id order.
///
/// The dot is the centroid rounded half-up per axis. When that pixel is not
/// part of the instance (concave shapes), the member pixel closest to the real
/// centroid is used instead; ties go to the first pixel in raster order.
inline DotSet extract_dots(const InstanceMap& inst) {
  std::uint16_t max_id = 0;
  for (auto id : inst.pixels()) max_id = std::max(max_id, id);
  if (max_id == 0) return {};

  std::vector<double> sx(max_id + 1, 0.0), sy(max_id + 1, 0.0);
  std::vector<std::int64_t> n(max_id + 1, 0);
  for (int y = 0; y < inst.height(); ++y) {
    for (int x = 0; x < inst.width(); ++x) {
      const auto id = inst(x, y);
      if (id == 0) continue;
      sx[id] += x;
      sy[id] += y;
      ++n[id];
    }
  }

  DotSet dots;
  std::vector<int> off_shape;
  std::vector<std::size_t> slot(max_id + 1, 0);
  for (int id = 1; id <= max_id; ++id) {
    if (n[id] == 0) continue;
    const double cx = sx[id] / static_cast<double>(n[id]);
    const double cy = sy[id] / static_cast<double>(n[id]);
    const Pixel p{round_half_up(cx), round_half_up(cy)};
    slot[id] = dots.size();
    dots.push_back(p);
    if (!inst.contains(p) || inst[p] != id) off_shape.push_back(id);
  }

  if (!off_shape.empty()) {
    std::vector<double> best(max_id + 1, std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> wanted(max_id + 1, 0);
    for (auto id : off_shape) wanted[id] = 1;
    for (int y = 0; y < inst.height(); ++y) {
      for (int x = 0; x < inst.width(); ++x) {
        const auto id = inst(x, y);
        if (!wanted[id]) continue;
        const double cx = sx[id] / static_cast<double>(n[id]);
        const double cy = sy[id] / static_cast<double>(n[id]);
        const double d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        if (d < best[id]) {
          best[id] = d;
          dots[slot[id]] = {x, y};
        }
      }
    }
  }
  return dots;
}

// ---------------------------------------------------------------------------
// Augmentation

struct AugmentSpec {
  bool hflip = false;
  std::optional<int> blur_kernel;  // odd, 3..7
  std::optional<double> gamma;     // 0.8..1.2

  void validate() const {
    if (blur_kernel && (*blur_kernel < 3 || *blur_kernel > 7 || *blur_kernel % 2 == 0)) {
      throw ConfigError("blur kernel must be odd and within [3, 7], got " +
                        std::to_string(*blur_kernel));
    }
    if (gamma && !(*gamma >= 0.8 && *gamma <= 1.2)) {
      throw ConfigError("gamma must lie within [0.8, 1.2]");
    }
  }
};

/// Draws an augmentation: flip with probability 1/2, blur and gamma each with
/// probability 1/2, kernel uniform over {3,5,7}, gamma uniform in [0.8, 1.2].
inline AugmentSpec sample_augment(Rng& rng) {
  AugmentSpec spec;
  spec.hflip = rng.bernoulli(0.5);
  if (rng.bernoulli(0.5)) spec.blur_kernel = 3 + 2 * rng.range(0, 2);
  if (rng.bernoulli(0.5)) spec.gamma = rng.uniform(0.8, 1.2);
  return spec;
}

template <typename T>
Raster<T> flip_horizontal(const Raster<T>& in) {
  Raster<T> out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) out(x, y) = in(in.width() - 1 - x, y);
  return out;
}

/// k x k mean filter with clamped borders, rounded half-up.
inline GrayImage box_blur(const GrayImage& in, int k) {
  const int r = k / 2;
  const int w = in.width();
  const int h = in.height();
  GrayImage out(w, h);
  const int area = k * k;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int sum = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -r; dx <= r; ++dx) sum += in(std::clamp(x + dx, 0, w - 1), yy);
      }
      out(x, y) = static_cast<std::uint8_t>((sum + area / 2) / area);
    }
  }
  return out;
}

inline GrayImage gamma_shift(const GrayImage& in, double gamma) {
  std::uint8_t lut[256];
  for (int v = 0; v < 256; ++v) {
    const double o = 255.0 * std::pow(v / 255.0, gamma);
    lut[v] = static_cast<std::uint8_t>(std::clamp(round_half_up(o), 0, 255));
  }
  GrayImage out = in;
  for (auto& v : out.pixels()) v = lut[v];
  return out;
}

struct Augmented {
  GrayImage image;
  SemanticMask mask;
};

/// Geometric ops apply to image and mask; photometric ops to the image only.
inline Augmented augment(const GrayImage& img, const SemanticMask& mask, const AugmentSpec& spec) {
  spec.validate();
  if (!img.same_shape(mask)) throw ConfigError("augment: image and mask dimensions differ");
  Augmented out{img, mask};
  if (spec.hflip) {
    out.image = flip_horizontal(out.image);
    out.mask = flip_horizontal(out.mask);
  }
  if (spec.blur_kernel) out.image = box_blur(out.image, *spec.blur_kernel);
  if (spec.gamma) out.image = gamma_shift(out.image, *spec.gamma);
  return out;
}

}  // namespace berrycount
