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

#include <concepts>
#include <numbers>
#include <string>
#include <vector>

#include "berrycount/raster.hpp"

namespace berrycount {

/// Anything carrying the shape descriptors the geometric filters read.
template <typename C>
concept ShapeDescribed = requires(const C& c) {
  { c.area_px } -> std::convertible_to<double>;
  { c.a_maj } -> std::convertible_to<double>;
  { c.a_min } -> std::convertible_to<double>;
  { c.enclosure } -> std::convertible_to<double>;
};

/// Thresholds for the three post-processing stages.
///
///   Axis: keep iff a_min / a_maj >  axis_ratio_min   (strict)
///   Area: keep iff area >= area_ratio_min * pi * ((a_min + a_maj) / 4)^2
///   Edge: keep iff enclosure >= enclosure_min
struct FilterConfig {
  double axis_ratio_min = 0.3;
  double area_ratio_min = 0.3;
  double enclosure_min = 0.4;
  bool axis = true;
  bool area = true;
  bool edge = true;

  void validate() const {
    for (double t : {axis_ratio_min, area_ratio_min, enclosure_min}) {
      if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("filter thresholds must lie in [0, 1]");
    }
  }

  static FilterConfig none() { return {0.3, 0.3, 0.4, false, false, false}; }
};

template <ShapeDescribed C>
bool passes_axis(const C& c, const FilterConfig& cfg) {
  return c.a_maj > 0.0 && c.a_min / c.a_maj > cfg.axis_ratio_min;
}

/// Area of the circle whose radius is the mean semi-axis.
template <ShapeDescribed C>
double circle_area(const C& c) {
  const double r = (c.a_min + c.a_maj) / 4.0;
  return std::numbers::pi * r * r;
}

template <ShapeDescribed C>
bool passes_area(const C& c, const FilterConfig& cfg) {
  return static_cast<double>(c.area_px) >= cfg.area_ratio_min * circle_area(c);
}

template <ShapeDescribed C>
bool passes_edge(const C& c, const FilterConfig& cfg) {
  return c.enclosure >= cfg.enclosure_min;
}

namespace detail {

template <ShapeDescribed C, typename Pred>
std::vector<C> keep_if(const std::vector<C>& in, Pred pred) {
  std::vector<C> out;
  out.reserve(in.size());
  for (const C& c : in)
    if (pred(c)) out.push_back(c);
  return out;
}

}  // namespace detail

template <ShapeDescribed C>
std::vector<C> filter_axis(const std::vector<C>& comps, const FilterConfig& cfg) {
  return detail::keep_if(comps, [&](const C& c) { return passes_axis(c, cfg); });
}

template <ShapeDescribed C>
std::vector<C> filter_area(const std::vector<C>& comps, const FilterConfig& cfg) {
  return detail::keep_if(comps, [&](const C& c) { return passes_area(c, cfg); });
}

template <ShapeDescribed C>
std::vector<C> filter_edge(const std::vector<C>& comps, const FilterConfig& cfg) {
  return detail::keep_if(comps, [&](const C& c) { return passes_edge(c, cfg); });
}

struct StageCount {
  std::string stage;  // "axis", "area" or "edge"
  bool enabled = false;
  std::size_t input = 0;
  std::size_t removed = 0;
};

template <ShapeDescribed C>
struct FilterResult {
  std::vector<C> kept;
  std::vector<StageCount> stages;  // always axis, area, edge in that order
  std::vector<std::vector<C>> after_stage;  // kept set after each stage
};

/// Axis, then Area, then Edge; disabled stages pass everything through.
template <ShapeDescribed C>
FilterResult<C> run_pipeline(const std::vector<C>& comps, const FilterConfig& cfg) {
  cfg.validate();
  FilterResult<C> r;
  std::vector<C> current = comps;
  auto stage = [&](const char* name, bool enabled, auto&& filter) {
    StageCount s{name, enabled, current.size(), 0};
    if (enabled) {
      std::vector<C> next = filter(current, cfg);
      s.removed = current.size() - next.size();
      current = std::move(next);
    }
    r.stages.push_back(s);
    r.after_stage.push_back(current);
  };
  stage("axis", cfg.axis, [](const auto& v, const auto& c) { return filter_axis(v, c); });
  stage("area", cfg.area, [](const auto& v, const auto& c) { return filter_area(v, c); });
  stage("edge", cfg.edge, [](const auto& v, const auto& c) { return filter_edge(v, c); });
  r.kept = std::move(current);
  return r;
}

inline std::string format_stage_report(const std::vector<StageCount>& stages) {
  std::string out = "stage,enabled,input,removed,kept\n";
  for (const auto& s : stages) {
    out += s.stage + "," + (s.enabled ? "1" : "0") + "," + std::to_string(s.input) + "," +
           std::to_string(s.removed) + "," + std::to_string(s.input - s.removed) + "\n";
  }
  return out;
}

}  // namespace berrycount
