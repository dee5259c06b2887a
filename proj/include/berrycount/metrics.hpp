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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "berrycount/instancer.hpp"
#include "berrycount/labelgen.hpp"
#include "berrycount/raster.hpp"

namespace berrycount {

// ---------------------------------------------------------------------------
// Pixel IoU

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

struct IouReport {
  std::array<ConfusionCounts, kNumClasses> counts{};
  std::array<double, kNumClasses> per_class{};
  double mean = 0.0;

  double operator[](Class c) const { return per_class[static_cast<std::size_t>(c)]; }
};

/// One-vs-rest IoU = TP / (TP + FP + FN) per class. A class absent from both
/// masks scores 1. The mean is over all three classes.
inline IouReport iou(const SemanticMask& pred, const SemanticMask& ref) {
  if (!pred.same_shape(ref)) {
    throw FormatError("iou: prediction is " + std::to_string(pred.width()) + "x" +
                      std::to_string(pred.height()) + ", reference is " +
                      std::to_string(ref.width()) + "x" + std::to_string(ref.height()));
  }
  IouReport r;
  auto p = pred.pixels();
  auto q = ref.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto a = static_cast<std::size_t>(p[i]);
    const auto b = static_cast<std::size_t>(q[i]);
    if (a == b) {
      ++r.counts[a].tp;
    } else {
      ++r.counts[a].fp;
      ++r.counts[b].fn;
    }
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& k = r.counts[c];
    const auto denom = k.tp + k.fp + k.fn;
    r.per_class[c] = denom == 0 ? 1.0 : static_cast<double>(k.tp) / static_cast<double>(denom);
    sum += r.per_class[c];
  }
  r.mean = sum / static_cast<double>(kNumClasses);
  return r;
}

/// IoU expressed as a loss value, -ln(IoU).
inline double iou_loss(double iou_value) {
  if (!(iou_value > 0.0) || iou_value > 1.0) {
    throw std::domain_error("iou_loss: IoU must lie in (0, 1]");
  }
  return 0.0 - std::log(iou_value);
}

// ---------------------------------------------------------------------------
// Dot-matched detection metrics

struct DetectionTally {
  std::size_t n_components = 0;
  std::size_t n_dots = 0;
  std::size_t tp = 0;  // components containing at least one dot
};

struct DetectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  DetectionTally tally;
  bool precision_undefined = false;  // no components
  bool recall_undefined = false;     // no dots
};

inline double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

inline DetectionMetrics metrics_from_tally(const DetectionTally& t) {
  DetectionMetrics m;
  m.tally = t;
  m.precision_undefined = t.n_components == 0;
  m.recall_undefined = t.n_dots == 0;
  m.precision = m.precision_undefined ? 0.0 : static_cast<double>(t.tp) / t.n_components;
  m.recall = m.recall_undefined ? 0.0 : static_cast<double>(t.tp) / t.n_dots;
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

namespace detail {

inline std::uint64_t pixel_key(Pixel p) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
         static_cast<std::uint32_t>(p.y);
}

}  // namespace detail

/// A component is a true positive when its pixel set contains a dot.
/// Precision = TP / components, recall = TP / dots.
template <typename C>
  requires requires(const C& c) { c.pixels; }
DetectionMetrics detection_metrics(const std::vector<C>& components, const DotSet& dots) {
  std::unordered_set<std::uint64_t> dot_keys;
  dot_keys.reserve(dots.size() * 2);
  for (const Pixel& d : dots) dot_keys.insert(detail::pixel_key(d));
  DetectionTally t;
  t.n_components = components.size();
  t.n_dots = dots.size();
  for (const C& c : components) {
    for (const Pixel& p : c.pixels) {
      if (dot_keys.contains(detail::pixel_key(p))) {
        ++t.tp;
        break;
      }
    }
  }
  return metrics_from_tally(t);
}

// ---------------------------------------------------------------------------
// Per-patch counting and regression

struct CountRecord {
  int patch_row = 0;
  int patch_col = 0;
  int manual = 0;
  int predicted = 0;
  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

/// Counts per cell of a non-overlapping patch grid (edge cells may be smaller).
/// A component belongs to the cell holding its centroid, rounded half-up to a
/// pixel; a dot to the cell holding it. Every cell gets a record.
template <typename C>
  requires requires(const C& c) { c.centroid.x; }
std::vector<CountRecord> per_patch_counts(const std::vector<C>& components, const DotSet& dots,
                                          int patch_w, int patch_h, int image_w, int image_h) {
  if (patch_w < 1 || patch_h < 1 || image_w < 1 || image_h < 1) {
    throw ConfigError("per_patch_counts: dimensions must be positive");
  }
  const int cols = (image_w + patch_w - 1) / patch_w;
  const int rows = (image_h + patch_h - 1) / patch_h;
  std::vector<CountRecord> out(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out[static_cast<std::size_t>(r) * cols + c] = {r, c, 0, 0};
  auto cell = [&](int x, int y) -> CountRecord& {
    x = std::clamp(x, 0, image_w - 1);
    y = std::clamp(y, 0, image_h - 1);
    return out[static_cast<std::size_t>(y / patch_h) * cols + x / patch_w];
  };
  for (const Pixel& d : dots) ++cell(d.x, d.y).manual;
  for (const C& c : components) ++cell(round_half_up(c.centroid.x), round_half_up(c.centroid.y)).predicted;
  return out;
}

enum class FitMode { Ols, Identity };

struct FitResult {
  double slope = 1.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

/// predicted ~ slope * manual + intercept.
///
/// Ols fits the line by least squares; R^2 = 1 - SS_res / SS_tot.
/// Identity scores the fixed line predicted = manual against the same SS_tot.
inline FitResult r_squared(std::span<const CountRecord> records, FitMode mode = FitMode::Ols) {
  if (records.size() < 2) throw Error("r_squared: need at least 2 records");
  const double n = static_cast<double>(records.size());
  double mx = 0.0, my = 0.0;
  for (const auto& r : records) {
    mx += r.manual;
    my += r.predicted;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& r : records) {
    const double dx = r.manual - mx;
    const double dy = r.predicted - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw Error("r_squared: manual counts have zero variance");
  FitResult f;
  if (mode == FitMode::Ols) {
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
  }
  double ss_res = 0.0;
  for (const auto& r : records) {
    const double e = r.predicted - (f.slope * r.manual + f.intercept);
    ss_res += e * e;
  }
  if (ss_res == 0.0) {
    f.r_squared = 1.0;
  } else {
    f.r_squared = syy == 0.0 ? -std::numeric_limits<double>::infinity() : 1.0 - ss_res / syy;
  }
  return f;
}

inline std::string format_count_records(std::span<const CountRecord> records) {
  std::string out = "patch_row,patch_col,manual,predicted\n";
  for (const auto& r : records) {
    out += std::to_string(r.patch_row) + "," + std::to_string(r.patch_col) + "," +
           std::to_string(r.manual) + "," + std::to_string(r.predicted) + "\n";
  }
  return out;
}

inline std::vector<CountRecord> parse_count_records(std::string_view text) {
  std::vector<CountRecord> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "patch_row,patch_col,manual,predicted") throw FormatError("counts: bad header");
      continue;
    }
    if (line.empty()) continue;
    CountRecord r;
    int consumed = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d%n", &r.patch_row, &r.patch_col, &r.manual,
                    &r.predicted, &consumed) != 4 ||
        static_cast<std::size_t>(consumed) != line.size() || r.manual < 0 || r.predicted < 0) {
      throw FormatError("counts line " + std::to_string(line_no) + ": malformed row");
    }
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Correlation plot

struct PlotGeometry {
  double size = 480.0;
  double margin = 50.0;
};

/// Scatter of (manual, predicted) per patch with the dashed identity line and
/// the solid fitted line, both spanning manual counts 0..max.
inline std::string emit_correlation_plot(std::span<const CountRecord> records,
                                         const std::optional<FitResult>& fit,
                                         PlotGeometry geo = {}) {
  int max_count = 1;
  for (const auto& r : records) max_count = std::max({max_count, r.manual, r.predicted});
  const double span = geo.size - 2.0 * geo.margin;
  auto sx = [&](double v) { return geo.margin + v / max_count * span; };
  auto sy = [&](double v) { return geo.size - geo.margin - v / max_count * span; };

  char buf[512];
  std::string svg;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\">\n",
                geo.size, geo.size, geo.size, geo.size);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<path class=\"axes\" d=\"M %.2f %.2f L %.2f %.2f L %.2f %.2f\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                sx(0), sy(max_count), sx(0), sy(0), sx(max_count), sy(0));
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-size=\"12\">manual count"
                "</text>\n<text x=\"14\" y=\"%.2f\" font-size=\"12\" transform=\"rotate(-90 14 "
                "%.2f)\" text-anchor=\"middle\">predicted count</text>\n",
                geo.size / 2, geo.size - 14, geo.size / 2, geo.size / 2);
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<line class=\"identity\" x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                "stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n",
                sx(0), sy(0), sx(max_count), sy(max_count));
  svg += buf;
  if (fit) {
    std::snprintf(buf, sizeof buf,
                  "<line class=\"fit\" x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                  "stroke=\"black\"/>\n",
                  sx(0), sy(fit->intercept), sx(max_count),
                  sy(fit->slope * max_count + fit->intercept));
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<text class=\"r2\" x=\"%.2f\" y=\"%.2f\" font-size=\"14\">R&#178; = %.2f%%"
                  "</text>\n",
                  geo.margin + 10, geo.margin + 10, 100.0 * fit->r_squared);
    svg += buf;
  }
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"none\" stroke=\"red\"/>\n",
                  sx(r.manual), sy(r.predicted));
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

// ---------------------------------------------------------------------------
// Evaluation report

struct EvalReport {
  std::optional<IouReport> pixel_iou;
  DetectionMetrics detection;
  std::vector<CountRecord> counts;
  std::optional<FitResult> fit;  // absent when the counts admit no fit
};

/// CSV "metric,class,value". Reals carry 6 decimals; P/R/F1 also appear as
/// percentages with 2 decimals.
inline std::string format_report(const EvalReport& r) {
  std::string out = "metric,class,value\n";
  char buf[128];
  auto real = [&](const char* metric, std::string_view cls, double v) {
    std::snprintf(buf, sizeof buf, "%s,%.*s,%.6f\n", metric, static_cast<int>(cls.size()),
                  cls.data(), v);
    out += buf;
  };
  auto pct = [&](const char* metric, double v) {
    std::snprintf(buf, sizeof buf, "%s,berry,%.2f\n", metric, 100.0 * v);
    out += buf;
  };
  auto integer = [&](const char* metric, std::string_view cls, std::size_t v) {
    out += std::string(metric) + "," + std::string(cls) + "," + std::to_string(v) + "\n";
  };
  if (r.pixel_iou) {
    for (Class c : kAllClasses) real("iou", class_name(c), (*r.pixel_iou)[c]);
    real("iou", "mean", r.pixel_iou->mean);
    if (r.pixel_iou->mean > 0.0) real("iou_loss", "mean", iou_loss(r.pixel_iou->mean));
  }
  const auto& d = r.detection;
  integer("components", "berry", d.tally.n_components);
  integer("dots", "berry", d.tally.n_dots);
  integer("tp", "berry", d.tally.tp);
  real("precision", "berry", d.precision);
  real("recall", "berry", d.recall);
  real("f1", "berry", d.f1);
  pct("precision_pct", d.precision);
  pct("recall_pct", d.recall);
  pct("f1_pct", d.f1);
  integer("patches", "count", r.counts.size());
  if (r.fit) {
    real("slope", "count", r.fit->slope);
    real("intercept", "count", r.fit->intercept);
    real("r_squared", "count", r.fit->r_squared);
  } else {
    out += "r_squared,count,nan\n";
  }
  return out;
}

}  // namespace berrycount
