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

#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "berrycount/filters.hpp"
#include "berrycount/instancer.hpp"
#include "berrycount/labelgen.hpp"
#include "berrycount/metrics.hpp"
#include "berrycount/raster.hpp"
#include "berrycount/synth.hpp"
#include "berrycount/tiler.hpp"

namespace berrycount {

/// Error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, int exit_code)
      : Error(what), stage_(std::move(stage)), exit_code_(exit_code) {}

  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

/// Runs `fn`, re-raising library errors as StageError(stage).
template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError& e) {
    throw StageError(stage, e.what(), kExitUsage);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), kExitData);
  }
}

struct Size2 {
  int w = 0;
  int h = 0;
  friend bool operator==(const Size2&, const Size2&) = default;
};

/// Parses "WxH" with both sides positive.
inline Size2 parse_size(std::string_view text) {
  const auto x = text.find('x');
  auto num = [&](std::string_view s) {
    if (s.empty() || s.size() > 7) throw ConfigError("bad dimension '" + std::string(text) + "'");
    int v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw ConfigError("bad dimension '" + std::string(text) + "'");
      v = v * 10 + (c - '0');
    }
    return v;
  };
  if (x == std::string_view::npos) throw ConfigError("expected WxH, got '" + std::string(text) + "'");
  Size2 s{num(text.substr(0, x)), num(text.substr(x + 1))};
  if (s.w < 1 || s.h < 1) throw ConfigError("dimension must be positive in '" + std::string(text) + "'");
  return s;
}

inline std::string format_size(Size2 s) { return std::to_string(s.w) + "x" + std::to_string(s.h); }

// ---------------------------------------------------------------------------
// Pipeline configuration

struct PipelineConfig {
  // inputs: a synth scene directory, an instance map, or an external prediction
  std::string scene_dir;
  std::string instances;
  std::string dots;
  std::string pred_mask;
  std::string ref_mask;
  std::string out_dir = "pipeline_out";

  int edge_width = 2;
  Size2 patch{432, 256};
  double overlap = 0.5;
  FilterConfig filters;
  Size2 eval_patch{432, 256};
  std::optional<CorruptionSpec> corruption;
  FitMode fit = FitMode::Ols;
  int threads = 1;

  void validate() const {
    if (edge_width < 1 || edge_width > 64) throw ConfigError("edge_width must lie in [1, 64]");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");
    if (threads < 1 || threads > 256) throw ConfigError("threads must lie in [1, 256]");
    filters.validate();
    if (corruption) corruption->validate();
    const bool synthetic = !scene_dir.empty() || !instances.empty();
    if (synthetic == !pred_mask.empty()) {
      throw ConfigError("give exactly one of scene_dir/instances (oracle mode) or pred_mask");
    }
    if (!scene_dir.empty() && !instances.empty()) throw ConfigError("scene_dir and instances are exclusive");
    if (!pred_mask.empty() && dots.empty()) throw ConfigError("pred_mask requires dots");
    if (!pred_mask.empty() && corruption) throw ConfigError("corruption needs an instance map");
    if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
    std::set<std::string> seen;
    for (const std::string* p : {&scene_dir, &instances, &dots, &pred_mask, &ref_mask, &out_dir}) {
      if (p->empty()) continue;
      const auto norm = std::filesystem::path(*p).lexically_normal().string();
      if (!seen.insert(norm).second) throw ConfigError("path '" + *p + "' used twice");
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_real(std::string_view key, std::string_view v) {
  std::string s(v);
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(d)) {
    throw ConfigError("'" + std::string(key) + "': not a number: '" + s + "'");
  }
  return d;
}

inline long parse_integer(std::string_view key, std::string_view v) {
  std::string s(v);
  char* end = nullptr;
  const long n = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError("'" + std::string(key) + "': not an integer: '" + s + "'");
  }
  return n;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError("'" + std::string(key) + "': expected a boolean, got '" + std::string(v) + "'");
}

}  // namespace detail

/// Applies one key=value setting.
inline void apply_config_setting(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  using namespace detail;
  auto corruption = [&]() -> CorruptionSpec& {
    if (!cfg.corruption) cfg.corruption = CorruptionSpec{};
    return *cfg.corruption;
  };
  if (key == "scene_dir") cfg.scene_dir = value;
  else if (key == "instances") cfg.instances = value;
  else if (key == "dots") cfg.dots = value;
  else if (key == "pred_mask") cfg.pred_mask = value;
  else if (key == "ref_mask") cfg.ref_mask = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "edge_width") cfg.edge_width = static_cast<int>(parse_integer(key, value));
  else if (key == "patch") cfg.patch = parse_size(value);
  else if (key == "overlap") cfg.overlap = parse_real(key, value);
  else if (key == "axis_ratio_min") cfg.filters.axis_ratio_min = parse_real(key, value);
  else if (key == "area_ratio_min") cfg.filters.area_ratio_min = parse_real(key, value);
  else if (key == "enclosure_min") cfg.filters.enclosure_min = parse_real(key, value);
  else if (key == "filter_axis") cfg.filters.axis = parse_bool(key, value);
  else if (key == "filter_area") cfg.filters.area = parse_bool(key, value);
  else if (key == "filter_edge") cfg.filters.edge = parse_bool(key, value);
  else if (key == "eval_patch") cfg.eval_patch = parse_size(value);
  else if (key == "merge_rate") corruption().merge_rate = parse_real(key, value);
  else if (key == "drop_below") corruption().drop_below = parse_real(key, value);
  else if (key == "crescent_noise") corruption().crescent_noise = static_cast<int>(parse_integer(key, value));
  else if (key == "dilate_edge") corruption().dilate_edge = static_cast<int>(parse_integer(key, value));
  else if (key == "corrupt_seed") corruption().seed = static_cast<std::uint64_t>(parse_integer(key, value));
  else if (key == "threads") cfg.threads = static_cast<int>(parse_integer(key, value));
  else if (key == "fit") {
    if (value == "ols") cfg.fit = FitMode::Ols;
    else if (value == "identity") cfg.fit = FitMode::Identity;
    else throw ConfigError("fit must be 'ols' or 'identity'");
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

/// Parses line-oriented key=value text. Blank lines and '#' comments are
/// skipped; absent keys keep their defaults.
inline PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      apply_config_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Commands. Each writes files and is what the CLI subcommand of the same name
// calls.

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create directory " + dir + ": " + ec.message());
}

inline Scene cmd_synth(const SceneSpec& spec, int edge_width, const std::string& out_dir) {
  Scene scene = in_stage("synth", [&] { return generate_scene(spec); });
  in_stage("synth", [&] {
    ensure_dir(out_dir);
    write_file(join_path(out_dir, "instances.pgm"), encode_instance_map(scene.instances));
    write_file(join_path(out_dir, "mask.pgm"),
               encode_semantic_mask(synthesize_labels(scene.instances, EdgeWidth(edge_width))));
    write_file(join_path(out_dir, "dots.csv"), format_dots(scene.dots));
    write_file(join_path(out_dir, "image.pgm"), encode_gray_image(scene.image));
    write_file(join_path(out_dir, "spec.txt"), format_scene_spec(spec));
  });
  return scene;
}

inline void cmd_labelgen(const std::string& instances, int edge_width, const std::string& out,
                         const std::string& dots_out) {
  in_stage("labelgen", [&] {
    const InstanceMap inst = decode_instance_map(read_file(instances));
    write_file(out, encode_semantic_mask(synthesize_labels(inst, EdgeWidth(edge_width))));
    if (!dots_out.empty()) write_file(dots_out, format_dots(extract_dots(inst)));
  });
}

inline std::string patch_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "patch_%04zu.pgm", index);
  return buf;
}

/// Cuts any PGM into grid patches; writes grid.txt and patch_NNNN.pgm.
inline PatchGrid cmd_tile(const std::string& image, Size2 patch, double overlap, const std::string& out_dir) {
  return in_stage("tile", [&] {
    const Pgm pgm = decode_pgm(read_file(image));
    const PatchGrid grid = plan_grid(pgm.width, pgm.height, patch.w, patch.h, overlap);
    Raster<std::uint16_t> raster(pgm.width, pgm.height);
    std::copy(pgm.samples.begin(), pgm.samples.end(), raster.pixels().begin());
    const auto patches = extract(raster, grid);
    ensure_dir(out_dir);
    write_file(join_path(out_dir, "grid.txt"), format_grid(grid));
    for (std::size_t i = 0; i < patches.size(); ++i) {
      Pgm p{grid.patch_w, grid.patch_h, pgm.maxval,
            {patches[i].pixels().begin(), patches[i].pixels().end()}};
      write_file(join_path(out_dir, patch_file_name(i)), encode_pgm(p));
    }
    return grid;
  });
}

inline void cmd_stitch(const std::string& grid_path, const std::string& patches_dir,
                       const std::string& out, int threads) {
  in_stage("stitch", [&] {
    const PatchGrid grid = parse_grid(read_file(grid_path));
    std::vector<SemanticMask> masks;
    masks.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      masks.push_back(decode_semantic_mask(read_file(join_path(patches_dir, patch_file_name(i)))));
    }
    write_file(out, encode_semantic_mask(stitch(masks, grid, grid.image_w, grid.image_h, threads)));
  });
}

inline void cmd_components(const std::string& mask_path, const std::string& out) {
  in_stage("components", [&] {
    const SemanticMask mask = decode_semantic_mask(read_file(mask_path));
    write_file(out, format_components(connected_components(mask)));
  });
}

inline FilterResult<Component> cmd_filter(const std::string& components_path, const FilterConfig& cfg,
                                          const std::string& report, const std::string& kept_out) {
  return in_stage("filter", [&] {
    const auto comps = parse_components(read_file(components_path));
    auto result = run_pipeline(comps, cfg);
    if (!report.empty()) write_file(report, format_stage_report(result.stages));
    if (!kept_out.empty()) write_file(kept_out, format_components(result.kept));
    return result;
  });
}

/// Metric evaluation of a predicted mask.
///
/// Components are extracted from `pred`; when `kept` is given only components
/// whose id appears in that descriptor table take part.
inline EvalReport evaluate(const SemanticMask& pred, const SemanticMask* ref, const DotSet& dots,
                           Size2 eval_patch, const std::vector<Component>& components, FitMode fit) {
  EvalReport report;
  if (ref) report.pixel_iou = iou(pred, *ref);
  check_dots_in_bounds(dots, pred.width(), pred.height());
  report.detection = detection_metrics(components, dots);
  report.counts = per_patch_counts(components, dots, eval_patch.w, eval_patch.h, pred.width(), pred.height());
  try {
    report.fit = r_squared(report.counts, fit);
  } catch (const Error&) {
    report.fit.reset();
  }
  return report;
}

inline std::vector<Component> select_components(std::vector<Component> all, const std::vector<Component>& kept) {
  std::unordered_set<int> ids;
  for (const auto& c : kept) ids.insert(c.id);
  std::erase_if(all, [&](const Component& c) { return !ids.contains(c.id); });
  return all;
}

inline void write_evaluation(const EvalReport& report, const std::string& out, const std::string& plot,
                             const std::string& counts_out) {
  write_file(out, format_report(report));
  if (!plot.empty()) write_file(plot, emit_correlation_plot(report.counts, report.fit));
  if (!counts_out.empty()) write_file(counts_out, format_count_records(report.counts));
}

inline EvalReport cmd_evaluate(const std::string& pred_path, const std::string& ref_path,
                               const std::string& dots_path, Size2 eval_patch, const std::string& kept_path,
                               FitMode fit, const std::string& out, const std::string& plot,
                               const std::string& counts_out) {
  return in_stage("evaluate", [&] {
    const SemanticMask pred = decode_semantic_mask(read_file(pred_path));
    std::optional<SemanticMask> ref;
    if (!ref_path.empty()) ref = decode_semantic_mask(read_file(ref_path));
    const DotSet dots = parse_dots(read_file(dots_path));
    auto comps = connected_components(pred);
    if (!kept_path.empty()) comps = select_components(std::move(comps), parse_components(read_file(kept_path)));
    EvalReport report = evaluate(pred, ref ? &*ref : nullptr, dots, eval_patch, comps, fit);
    write_evaluation(report, out, plot, counts_out);
    return report;
  });
}

struct PipelineOutcome {
  EvalReport report;
  std::vector<StageCount> stages;
  std::size_t n_components = 0;
  SemanticMask mask;
};

/// labelgen -> tile -> segment -> stitch -> components -> filter -> evaluate.
///
/// Writes into out_dir: labels.pgm (reference, oracle mode), mask.pgm (stitched
/// prediction), components.csv, kept.csv, stages.csv, counts.csv, report.csv
/// and plot.svg.
inline PipelineOutcome cmd_pipeline(const PipelineConfig& cfg) {
  in_stage("config", [&] { cfg.validate(); });
  in_stage("output", [&] { ensure_dir(cfg.out_dir); });

  std::optional<InstanceMap> inst;
  std::optional<SemanticMask> reference;
  DotSet dots;
  SemanticMask prediction;

  if (!cfg.pred_mask.empty()) {
    prediction = in_stage("segment", [&] { return decode_semantic_mask(read_file(cfg.pred_mask)); });
    if (!cfg.ref_mask.empty()) {
      reference = in_stage("segment", [&] { return decode_semantic_mask(read_file(cfg.ref_mask)); });
      in_stage("segment", [&] {
        if (!prediction.same_shape(*reference)) {
          throw FormatError("external mask is " + std::to_string(prediction.width()) + "x" +
                            std::to_string(prediction.height()) + " but reference is " +
                            std::to_string(reference->width()) + "x" + std::to_string(reference->height()));
        }
      });
    }
    dots = in_stage("segment", [&] {
      DotSet d = parse_dots(read_file(cfg.dots));
      check_dots_in_bounds(d, prediction.width(), prediction.height());
      return d;
    });
  } else {
    const std::string inst_path = cfg.instances.empty() ? join_path(cfg.scene_dir, "instances.pgm") : cfg.instances;
    inst = in_stage("labelgen", [&] { return decode_instance_map(read_file(inst_path)); });
    reference = in_stage("labelgen", [&] { return synthesize_labels(*inst, EdgeWidth(cfg.edge_width)); });
    dots = in_stage("labelgen", [&] {
      std::string dots_path = cfg.dots;
      if (dots_path.empty() && !cfg.scene_dir.empty()) dots_path = join_path(cfg.scene_dir, "dots.csv");
      DotSet d = dots_path.empty() ? extract_dots(*inst) : parse_dots(read_file(dots_path));
      check_dots_in_bounds(d, inst->width(), inst->height());
      return d;
    });
    in_stage("labelgen", [&] { write_file(join_path(cfg.out_dir, "labels.pgm"), encode_semantic_mask(*reference)); });
    prediction = in_stage("segment", [&] {
      return cfg.corruption ? corrupt(*reference, *inst, *cfg.corruption) : *reference;
    });
  }

  const PatchGrid grid = in_stage("tile", [&] {
    return plan_grid(prediction.width(), prediction.height(), cfg.patch.w, cfg.patch.h, cfg.overlap);
  });
  const auto patches = in_stage("tile", [&] { return extract(prediction, grid); });
  PipelineOutcome outcome;
  outcome.mask = in_stage("stitch", [&] {
    return stitch(patches, grid, prediction.width(), prediction.height(), cfg.threads);
  });
  in_stage("stitch", [&] { write_file(join_path(cfg.out_dir, "mask.pgm"), encode_semantic_mask(outcome.mask)); });

  const auto components = in_stage("components", [&] { return connected_components(outcome.mask); });
  const std::string table = format_components(components);
  outcome.n_components = components.size();
  in_stage("components", [&] { write_file(join_path(cfg.out_dir, "components.csv"), table); });

  // the filter consumes the descriptor table exactly as the filter command does
  const auto filtered = in_stage("filter", [&] { return run_pipeline(parse_components(table), cfg.filters); });
  outcome.stages = filtered.stages;
  in_stage("filter", [&] {
    write_file(join_path(cfg.out_dir, "stages.csv"), format_stage_report(filtered.stages));
    write_file(join_path(cfg.out_dir, "kept.csv"), format_components(filtered.kept));
  });

  outcome.report = in_stage("evaluate", [&] {
    const auto kept = select_components(components, filtered.kept);
    EvalReport r = evaluate(outcome.mask, reference ? &*reference : nullptr, dots, cfg.eval_patch, kept, cfg.fit);
    write_evaluation(r, join_path(cfg.out_dir, "report.csv"), join_path(cfg.out_dir, "plot.svg"),
                     join_path(cfg.out_dir, "counts.csv"));
    return r;
  });
  return outcome;
}

}  // namespace berrycount
