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
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "berrycount/instancer.hpp"
#include "berrycount/labelgen.hpp"
#include "berrycount/raster.hpp"
#include "berrycount/rng.hpp"

namespace berrycount {

/// Parameters of a synthetic vineyard scene.
///
/// Berries are filled ellipses grouped into bunches and drawn in painter's
/// order. A berry survives into the instance map only while its visible
/// remnant stays countable at every edge width up to `min_core_width`: the
/// per-instance erosion core must be nonempty, 4-connected, contain the
/// berry's dot and have a centroid that rounds to the dot.
struct SceneSpec {
  int width = 640;
  int height = 480;
  int n_bunches = 3;
  int berries_min = 10;
  int berries_max = 10;
  double radius_min = 8.0;
  double radius_max = 12.0;
  double ellipticity_min = 0.8;  // minor/major semi-axis ratio
  double ellipticity_max = 1.0;
  double bunch_spread = 60.0;    // max berry-center offset from the bunch center
  int n_crescents = 0;           // leaf-edge distractors rendered into the image only
  bool allow_occlusion = true;   // false: resample berry positions until nothing overlaps
  int min_core_width = 3;
  std::uint64_t seed = 0;

  void validate() const {
    if (width < 1 || height < 1) throw ConfigError("scene dimensions must be positive");
    if (n_bunches < 0 || berries_min < 0 || berries_max < berries_min || n_crescents < 0) {
      throw ConfigError("scene counts must be non-negative with nonempty ranges");
    }
    if (!(radius_min >= 1.0 && radius_max >= radius_min)) throw ConfigError("bad radius range");
    if (!(ellipticity_min >= 0.5 && ellipticity_max <= 1.0 && ellipticity_min <= ellipticity_max)) {
      throw ConfigError("ellipticity range must lie within [0.5, 1]");
    }
    if (bunch_spread < 0.0) throw ConfigError("bunch spread must be non-negative");
    if (min_core_width < 0) throw ConfigError("min_core_width must be non-negative");
  }
};

/// Compact, homogeneous bunches (vertical shoot positioning).
inline SceneSpec preset_vsp(std::uint64_t seed) {
  SceneSpec s;
  s.width = 2592;
  s.height = 2048;
  s.n_bunches = 7;
  s.berries_min = 64;
  s.berries_max = 84;
  s.radius_min = 8.0;
  s.radius_max = 14.0;
  s.ellipticity_min = 0.85;
  s.bunch_spread = 125.0;
  s.n_crescents = 10;
  s.seed = seed;
  return s;
}

/// Loose bunches with inhomogeneous berry sizes (semi minimal pruned hedge).
inline SceneSpec preset_smph(std::uint64_t seed) {
  SceneSpec s;
  s.width = 2592;
  s.height = 2048;
  s.n_bunches = 9;
  s.berries_min = 68;
  s.berries_max = 95;
  s.radius_min = 4.0;
  s.radius_max = 20.0;
  s.ellipticity_min = 0.7;
  s.bunch_spread = 230.0;
  s.n_crescents = 20;
  s.seed = seed;
  return s;
}

inline SceneSpec scene_preset(const std::string& name, std::uint64_t seed) {
  if (name == "vsp") return preset_vsp(seed);
  if (name == "smph") return preset_smph(seed);
  throw ConfigError("unknown scene preset '" + name + "' (expected vsp or smph)");
}

/// Line-oriented key=value dump of a spec.
inline std::string format_scene_spec(const SceneSpec& s) {
  std::ostringstream o;
  o.precision(17);
  o << "width=" << s.width << "\nheight=" << s.height << "\nn_bunches=" << s.n_bunches
    << "\nberries_min=" << s.berries_min << "\nberries_max=" << s.berries_max
    << "\nradius_min=" << s.radius_min << "\nradius_max=" << s.radius_max
    << "\nellipticity_min=" << s.ellipticity_min << "\nellipticity_max=" << s.ellipticity_max
    << "\nbunch_spread=" << s.bunch_spread << "\nn_crescents=" << s.n_crescents
    << "\nallow_occlusion=" << (s.allow_occlusion ? 1 : 0)
    << "\nmin_core_width=" << s.min_core_width << "\nseed=" << s.seed << "\n";
  return o.str();
}

struct Scene {
  InstanceMap instances;
  DotSet dots;
  GrayImage image;
  std::size_t requested = 0;  // berries drawn before visibility culling
};

namespace detail {

struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double a = 1.0;  // semi-axes
  double b = 1.0;
  double theta = 0.0;

  // <= 1 inside
  double form(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double u = (dx * c + dy * s) / a;
    const double v = (-dx * s + dy * c) / b;
    return u * u + v * v;
  }

  template <typename Fn>
  void for_each_pixel(int w, int h, Fn&& fn) const {
    const int r = static_cast<int>(std::ceil(a));
    const int x0 = std::max(0, static_cast<int>(cx) - r), x1 = std::min(w - 1, static_cast<int>(cx) + r);
    const int y0 = std::max(0, static_cast<int>(cy) - r), y1 = std::min(h - 1, static_cast<int>(cy) + r);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (form(x, y) <= 1.0) fn(x, y);
  }
};

// Largest 4-connected subset of `pixels` (ties: earliest in the given order).
inline std::vector<Pixel> largest_piece(const std::vector<Pixel>& pixels, int x0, int y0, int bw,
                                        int bh) {
  std::vector<int> label(static_cast<std::size_t>(bw) * bh, -1);  // -2 member, >=0 piece
  auto at = [&](int x, int y) -> int& { return label[static_cast<std::size_t>(y - y0) * bw + (x - x0)]; };
  for (const Pixel& p : pixels) at(p.x, p.y) = -2;
  std::vector<std::vector<Pixel>> pieces;
  std::vector<Pixel> stack;
  for (const Pixel& s : pixels) {
    if (at(s.x, s.y) != -2) continue;
    const int id = static_cast<int>(pieces.size());
    pieces.emplace_back();
    at(s.x, s.y) = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const Pixel p = stack.back();
      stack.pop_back();
      pieces.back().push_back(p);
      const Pixel nbrs[4] = {{p.x - 1, p.y}, {p.x + 1, p.y}, {p.x, p.y - 1}, {p.x, p.y + 1}};
      for (const Pixel& q : nbrs) {
        if (q.x < x0 || q.y < y0 || q.x >= x0 + bw || q.y >= y0 + bh) continue;
        if (at(q.x, q.y) == -2) {
          at(q.x, q.y) = id;
          stack.push_back(q);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < pieces.size(); ++i)
    if (pieces[i].size() > pieces[best].size()) best = i;
  return pieces.empty() ? std::vector<Pixel>{} : pieces[best];
}

inline bool is_single_piece(const std::vector<Pixel>& pixels, int x0, int y0, int bw, int bh) {
  return largest_piece(pixels, x0, y0, bw, bh).size() == pixels.size();
}

// Checks the countability rule for one instance given its pixels.
inline bool countable(const std::vector<Pixel>& pixels, int image_w, int image_h,
                      int min_core_width) {
  int x0 = pixels.front().x, x1 = x0, y0 = pixels.front().y, y1 = y0;
  for (const Pixel& p : pixels) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  // local map with a 1-pixel margin; pixels beyond the image stay 0 either way
  const int ox = x0 - 1, oy = y0 - 1;
  InstanceMap local(x1 - x0 + 3, y1 - y0 + 3, 0);
  for (const Pixel& p : pixels) local(p.x - ox, p.y - oy) = 1;
  const DotSet dot = extract_dots(local);
  const Pixel d = dot.front();
  for (int w = 1; w <= min_core_width; ++w) {
    const auto core = instance_cores(local, w);
    std::vector<Pixel> core_px;
    double sx = 0.0, sy = 0.0;
    for (int y = 0; y < local.height(); ++y)
      for (int x = 0; x < local.width(); ++x)
        if (core(x, y)) {
          core_px.push_back({x, y});
          sx += x;
          sy += y;
        }
    if (core_px.empty()) return false;
    if (!core(d.x, d.y)) return false;
    const double n = static_cast<double>(core_px.size());
    if (round_half_up(sx / n) != d.x || round_half_up(sy / n) != d.y) return false;
    if (!is_single_piece(core_px, 0, 0, local.width(), local.height())) return false;
  }
  (void)image_w;
  (void)image_h;
  return true;
}

}  // namespace detail

/// Renders a seeded scene: instance map, dot annotations and a shaded image.
inline Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  const int w = spec.width;
  const int h = spec.height;
  Rng rng(spec.seed);
  InstanceMap map(w, h, 0);
  std::vector<detail::Ellipse> berries{detail::Ellipse{}};  // index = painted id

  for (int b = 0; b < spec.n_bunches; ++b) {
    const int count = rng.range(spec.berries_min, spec.berries_max);
    const double margin_x = std::min(spec.bunch_spread + spec.radius_max + 2.0, w / 2.0);
    const double margin_y = std::min(spec.bunch_spread + spec.radius_max + 2.0, h / 2.0);
    const double bx = rng.uniform(margin_x, w - margin_x);
    const double by = rng.uniform(margin_y, h - margin_y);
    for (int k = 0; k < count; ++k) {
      detail::Ellipse e;
      e.a = rng.uniform(spec.radius_min, spec.radius_max);
      e.b = e.a * rng.uniform(spec.ellipticity_min, spec.ellipticity_max);
      e.theta = rng.uniform(0.0, std::numbers::pi);
      const int reach = static_cast<int>(std::ceil(e.a)) + 1;
      const int attempts = spec.allow_occlusion ? 1 : 200;
      bool placed = false;
      for (int attempt = 0; attempt < attempts && !placed; ++attempt) {
        const double rho = spec.bunch_spread * std::sqrt(rng.uniform());
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        e.cx = std::clamp(std::round(bx + rho * std::cos(phi)), static_cast<double>(std::min(reach, w / 2)),
                          static_cast<double>(std::max(w - 1 - reach, w / 2)));
        e.cy = std::clamp(std::round(by + rho * std::sin(phi)), static_cast<double>(std::min(reach, h / 2)),
                          static_cast<double>(std::max(h - 1 - reach, h / 2)));
        placed = true;
        if (!spec.allow_occlusion) {
          e.for_each_pixel(w, h, [&](int x, int y) { placed = placed && map(x, y) == 0; });
        }
      }
      if (!placed) throw ConfigError("scene too dense to place berries without occlusion");
      if (berries.size() > 65535) throw ConfigError("scene exceeds 65535 berries");
      const auto id = static_cast<std::uint16_t>(berries.size());
      berries.push_back(e);
      e.for_each_pixel(w, h, [&](int x, int y) { map(x, y) = id; });
    }
  }

  Scene scene;
  scene.requested = berries.size() - 1;

  // visibility culling
  std::vector<std::vector<Pixel>> pixels(berries.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (const auto id = map(x, y); id != 0) pixels[id].push_back({x, y});
  std::vector<std::uint16_t> relabel(berries.size(), 0);
  std::vector<int> source_of;  // final id -> painted id
  source_of.push_back(0);
  for (std::size_t id = 1; id < berries.size(); ++id) {
    auto& px = pixels[id];
    if (px.empty()) continue;
    int x0 = px.front().x, x1 = x0, y0 = px.front().y, y1 = px.back().y;
    for (const Pixel& p : px) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
    }
    auto piece = detail::largest_piece(px, x0, y0, x1 - x0 + 1, y1 - y0 + 1);
    if (piece.size() != px.size()) {
      for (const Pixel& p : px) map[p] = 0;
      for (const Pixel& p : piece) map[p] = static_cast<std::uint16_t>(id);
      std::sort(piece.begin(), piece.end(),
                [](Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      px = std::move(piece);
    }
    if (!detail::countable(px, w, h, spec.min_core_width)) {
      for (const Pixel& p : px) map[p] = 0;
      continue;
    }
    relabel[id] = static_cast<std::uint16_t>(source_of.size());
    source_of.push_back(static_cast<int>(id));
  }
  if (scene.requested > 0 && source_of.size() == 1) {
    throw ConfigError("scene too dense: no berry survives occlusion");
  }
  for (auto& id : map.pixels()) id = relabel[id];

  // shading: dim noisy background, berries bright in the middle
  GrayImage img(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto id = map(x, y);
      if (id == 0) {
        std::uint64_t k = spec.seed ^ (static_cast<std::uint64_t>(y) << 32 | static_cast<std::uint32_t>(x));
        img(x, y) = static_cast<std::uint8_t>(40 + Rng::splitmix64(k) % 16);
      } else {
        const double q = std::min(1.0, berries[static_cast<std::size_t>(source_of[id])].form(x, y));
        img(x, y) = static_cast<std::uint8_t>(110 + round_half_up(120.0 * std::sqrt(1.0 - q)));
      }
    }
  }
  for (int c = 0; c < spec.n_crescents; ++c) {
    const double cx = rng.uniform(0.0, w);
    const double cy = rng.uniform(0.0, h);
    const double r = rng.uniform(8.0, 16.0);
    const double start = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double span = rng.uniform(150.0, 240.0) * std::numbers::pi / 180.0;
    const int steps = static_cast<int>(std::ceil(r * span * 2.0));
    for (int i = 0; i <= steps; ++i) {
      const double t = start + span * i / steps;
      const int x = round_half_up(cx + r * std::cos(t));
      const int y = round_half_up(cy + r * std::sin(t));
      if (img.contains(x, y) && map(x, y) == 0) img(x, y) = 170;
    }
  }

  scene.instances = std::move(map);
  scene.dots = extract_dots(scene.instances);
  scene.image = std::move(img);
  return scene;
}

inline std::size_t count_instances(const InstanceMap& map) {
  std::vector<std::uint8_t> seen(65536, 0);
  std::size_t n = 0;
  for (auto id : map.pixels()) {
    if (id != 0 && !seen[id]) {
      seen[id] = 1;
      ++n;
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// Prediction corruption

/// Failure modes of a real segmenter applied to a ground-truth mask.
struct CorruptionSpec {
  double merge_rate = 0.0;   // chance of bridging the edge band of each touching pair
  double drop_below = 0.0;   // erase berries with equivalent radius below this
  int crescent_noise = 0;    // thin arcs painted as Berry on background
  int dilate_edge = 0;       // 4-neighborhood dilation steps of the Edge class into Berry
  std::uint64_t seed = 0;

  void validate() const {
    if (!(merge_rate >= 0.0 && merge_rate <= 1.0)) throw ConfigError("merge_rate must lie in [0, 1]");
    if (drop_below < 0.0) throw ConfigError("drop_below must be non-negative");
    if (crescent_noise < 0 || dilate_edge < 0) throw ConfigError("corruption counts must be non-negative");
  }

  bool is_identity() const {
    return merge_rate == 0.0 && drop_below == 0.0 && crescent_noise == 0 && dilate_edge == 0;
  }
};

struct CorruptionTrace {
  SemanticMask mask;
  Raster<std::uint8_t> footprint;  // 1 where an operation wrote
  std::size_t merged_pairs = 0;
  std::size_t dropped = 0;
  std::size_t crescents = 0;
  std::size_t dilated_pixels = 0;
};

namespace detail {

// Pixels of a 4-connected arc band: radii r-thickness+1..r, angles start..start+span.
inline std::vector<Pixel> crescent_pixels(double cx, double cy, int r, int thickness, double start,
                                          double span) {
  std::vector<Pixel> out;
  for (int layer = 0; layer < thickness; ++layer) {
    const double rr = r - layer;
    const int steps = std::max(8, static_cast<int>(std::ceil(rr * span * 3.0)));
    Pixel prev{round_half_up(cx + rr * std::cos(start)), round_half_up(cy + rr * std::sin(start))};
    out.push_back(prev);
    for (int i = 1; i <= steps; ++i) {
      const double t = start + span * i / steps;
      const Pixel p{round_half_up(cx + rr * std::cos(t)), round_half_up(cy + rr * std::sin(t))};
      if (p.x != prev.x && p.y != prev.y) out.push_back({p.x, prev.y});  // keep 4-connected
      out.push_back(p);
      prev = p;
    }
  }
  std::sort(out.begin(), out.end(), [](Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// Corrupts a ground-truth mask in a fixed order: merge, drop, crescent noise,
/// edge dilation. `mask` must be synthesized from `inst`.
inline CorruptionTrace corrupt_traced(const SemanticMask& mask, const InstanceMap& inst,
                                      const CorruptionSpec& spec) {
  spec.validate();
  if (!mask.same_shape(inst)) throw FormatError("corrupt: mask and instance map dimensions differ");
  const int w = mask.width();
  const int h = mask.height();
  CorruptionTrace t{mask, Raster<std::uint8_t>(w, h, 0)};
  SemanticMask& m = t.mask;
  Rng rng(spec.seed);

  // merge: bridge the edge band between touching instances
  if (spec.merge_rate > 0.0) {
    std::vector<std::pair<std::uint32_t, std::vector<Pixel>>> contacts;  // key a<<16|b
    {
      std::vector<std::pair<std::uint32_t, Pixel>> raw;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const auto a = inst(x, y);
          if (a == 0) continue;
          const Pixel nbrs[2] = {{x + 1, y}, {x, y + 1}};
          for (const Pixel& q : nbrs) {
            if (!inst.contains(q)) continue;
            const auto b = inst[q];
            if (b == 0 || b == a) continue;
            const std::uint32_t key = (static_cast<std::uint32_t>(std::min(a, b)) << 16) | std::max(a, b);
            raw.push_back({key, {x, y}});
            raw.push_back({key, q});
          }
        }
      }
      std::stable_sort(raw.begin(), raw.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
      for (const auto& [key, p] : raw) {
        if (contacts.empty() || contacts.back().first != key) contacts.push_back({key, {}});
        contacts.back().second.push_back(p);
      }
    }
    Raster<std::int32_t> dist(w, h, -1);
    for (const auto& [key, seeds] : contacts) {
      if (!rng.bernoulli(spec.merge_rate)) continue;
      const auto a = static_cast<std::uint16_t>(key >> 16);
      const auto b = static_cast<std::uint16_t>(key & 0xffff);
      auto in_pair = [&](Pixel p) { return inst[p] == a || inst[p] == b; };
      // BFS through Edge pixels of the pair, outward from the contact line
      std::vector<Pixel> band, frontier;
      for (const Pixel& p : seeds) {
        if (m[p] == Class::Edge && dist[p] < 0) {
          dist[p] = 0;
          frontier.push_back(p);
          band.push_back(p);
        }
      }
      bool touches_a = false, touches_b = false;
      int reach = -1;
      for (int step = 0; !frontier.empty() && step < 24; ++step) {
        std::vector<Pixel> next;
        for (const Pixel& p : frontier) {
          const Pixel nbrs[4] = {{p.x - 1, p.y}, {p.x + 1, p.y}, {p.x, p.y - 1}, {p.x, p.y + 1}};
          for (const Pixel& q : nbrs) {
            if (!m.contains(q) || !in_pair(q)) continue;
            if (m[q] == Class::Berry) {
              touches_a = touches_a || inst[q] == a;
              touches_b = touches_b || inst[q] == b;
            } else if (m[q] == Class::Edge && dist[q] < 0) {
              dist[q] = step + 1;
              next.push_back(q);
              band.push_back(q);
            }
          }
        }
        if (touches_a && touches_b && reach < 0) reach = step + 1 + spec.dilate_edge + 1;
        if (reach >= 0 && step + 1 >= reach) break;
        frontier = std::move(next);
      }
      const bool bridged = touches_a && touches_b;
      for (const Pixel& p : band) {
        if (bridged && dist[p] <= reach) {
          m[p] = Class::Berry;
          t.footprint[p] = 1;
        }
        dist[p] = -1;
      }
      t.merged_pairs += bridged;
    }
  }

  // drop: erase small berries
  if (spec.drop_below > 0.0) {
    std::vector<std::int64_t> area(65536, 0);
    for (auto id : inst.pixels()) ++area[id];
    std::vector<std::uint8_t> drop(65536, 0);
    for (std::size_t id = 1; id < area.size(); ++id) {
      if (area[id] > 0 && std::sqrt(static_cast<double>(area[id]) / std::numbers::pi) < spec.drop_below) {
        drop[id] = 1;
        ++t.dropped;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (drop[inst(x, y)] && m(x, y) != Class::Background) {
          m(x, y) = Class::Background;
          t.footprint(x, y) = 1;
        }
      }
    }
  }

  // crescent noise: isolated thin arcs on background
  for (int c = 0; c < spec.crescent_noise; ++c) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double cx = rng.uniform(0.0, w);
      const double cy = rng.uniform(0.0, h);
      const int r = rng.range(8, 16);
      // 1 px arcs span 95..240 degrees, 2 px arcs 180..240; both too hollow for their axes
      const int thickness = rng.range(1, 2);
      const double start = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double span = rng.uniform(thickness == 1 ? 95.0 : 180.0, 240.0) * std::numbers::pi / 180.0;
      const auto arc = detail::crescent_pixels(cx, cy, r, thickness, start, span);
      bool ok = true;
      for (const Pixel& p : arc) {
        for (int dy = -1; dy <= 1 && ok; ++dy)
          for (int dx = -1; dx <= 1 && ok; ++dx)
            ok = m.contains(p.x + dx, p.y + dy) && m(p.x + dx, p.y + dy) == Class::Background;
        if (!ok) break;
      }
      if (!ok) continue;
      for (const Pixel& p : arc) {
        m[p] = Class::Berry;
        t.footprint[p] = 1;
      }
      ++t.crescents;
      break;
    }
  }

  // thicker edges
  for (int step = 0; step < spec.dilate_edge; ++step) {
    std::vector<Pixel> grow;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (m(x, y) != Class::Berry) continue;
        if ((x > 0 && m(x - 1, y) == Class::Edge) || (x + 1 < w && m(x + 1, y) == Class::Edge) ||
            (y > 0 && m(x, y - 1) == Class::Edge) || (y + 1 < h && m(x, y + 1) == Class::Edge)) {
          grow.push_back({x, y});
        }
      }
    }
    for (const Pixel& p : grow) {
      m[p] = Class::Edge;
      t.footprint[p] = 1;
    }
    t.dilated_pixels += grow.size();
  }
  return t;
}

inline SemanticMask corrupt(const SemanticMask& mask, const InstanceMap& inst,
                            const CorruptionSpec& spec) {
  return corrupt_traced(mask, inst, spec).mask;
}

}  // namespace berrycount
