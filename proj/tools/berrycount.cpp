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

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "berrycount/berrycount.hpp"

namespace bc = berrycount;

namespace {

void print_summary(const bc::EvalReport& r) {
  const auto& d = r.detection;
  std::printf("components=%zu dots=%zu tp=%zu  P=%.2f%% R=%.2f%% F1=%.2f%%", d.tally.n_components,
              d.tally.n_dots, d.tally.tp, 100 * d.precision, 100 * d.recall, 100 * d.f1);
  if (r.fit) std::printf("  R2=%.2f%%", 100 * r.fit->r_squared);
  if (r.pixel_iou) std::printf("  mIoU=%.4f", r.pixel_iou->mean);
  std::printf("\n");
}

bc::FitMode fit_mode(const std::string& s) {
  if (s == "ols") return bc::FitMode::Ols;
  if (s == "identity") return bc::FitMode::Identity;
  throw bc::ConfigError("--fit must be ols or identity");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"berrycount: berry counting from berry/edge/background segmentation masks"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic scene");
  std::string preset = "vsp";
  std::uint64_t seed = 42;
  std::string synth_out;
  int synth_edge = 2;
  synth->add_option("--preset", preset, "vsp or smph")->capture_default_str();
  synth->add_option("--seed", seed)->capture_default_str();
  synth->add_option("--edge-width", synth_edge, "edge width of mask.pgm")->capture_default_str();
  synth->add_option("--out-dir", synth_out)->required();

  // labelgen
  auto* labelgen = app.add_subcommand("labelgen", "synthesize berry/edge labels from an instance map");
  std::string lg_in, lg_out, lg_dots;
  int lg_edge = 2;
  labelgen->add_option("--instances", lg_in)->required();
  labelgen->add_option("--edge-width", lg_edge)->capture_default_str();
  labelgen->add_option("--out", lg_out)->required();
  labelgen->add_option("--dots", lg_dots, "write one dot per instance");

  // tile
  auto* tile = app.add_subcommand("tile", "cut an image into overlapping patches");
  std::string tile_in, tile_patch = "432x256", tile_out;
  double tile_overlap = 0.5;
  tile->add_option("--image", tile_in)->required();
  tile->add_option("--patch", tile_patch)->capture_default_str();
  tile->add_option("--overlap", tile_overlap)->capture_default_str();
  tile->add_option("--out-dir", tile_out)->required();

  // stitch
  auto* stitch = app.add_subcommand("stitch", "majority-vote patch masks back into one mask");
  std::string st_grid, st_dir, st_out;
  int threads = 1;
  stitch->add_option("--grid", st_grid)->required();
  stitch->add_option("--patches", st_dir)->required();
  stitch->add_option("--out", st_out)->required();
  stitch->add_option("--threads", threads)->capture_default_str();

  // components
  auto* components = app.add_subcommand("components", "extract berry components and descriptors");
  std::string cc_mask, cc_out;
  components->add_option("--mask", cc_mask)->required();
  components->add_option("--out", cc_out)->required();

  // filter
  auto* filter = app.add_subcommand("filter", "axis/area/edge post-processing");
  std::string f_in, f_report, f_out;
  bc::FilterConfig fcfg;
  bool no_axis = false, no_area = false, no_edge = false;
  filter->add_option("--components", f_in)->required();
  filter->add_option("--axis", fcfg.axis_ratio_min)->capture_default_str();
  filter->add_option("--area", fcfg.area_ratio_min)->capture_default_str();
  filter->add_option("--enclosure", fcfg.enclosure_min)->capture_default_str();
  filter->add_flag("--no-axis", no_axis);
  filter->add_flag("--no-area", no_area);
  filter->add_flag("--no-edge", no_edge);
  filter->add_option("--report", f_report, "per-stage removal counts");
  filter->add_option("--out", f_out, "kept components");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "IoU, detection metrics and per-patch R^2");
  std::string ev_pred, ev_ref, ev_dots, ev_patch = "432x256", ev_out, ev_plot, ev_kept, ev_counts;
  std::string ev_fit = "ols";
  evaluate->add_option("--pred", ev_pred)->required();
  evaluate->add_option("--ref", ev_ref);
  evaluate->add_option("--dots", ev_dots)->required();
  evaluate->add_option("--patch", ev_patch)->capture_default_str();
  evaluate->add_option("--kept", ev_kept, "restrict to components listed in this table");
  evaluate->add_option("--fit", ev_fit, "ols or identity")->capture_default_str();
  evaluate->add_option("--out", ev_out)->required();
  evaluate->add_option("--plot", ev_plot);
  evaluate->add_option("--counts", ev_counts);

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "run every stage end to end");
  std::string p_config;
  std::vector<std::string> p_set;
  int p_threads = 0;
  pipeline->add_option("--config", p_config, "key=value config file");
  pipeline->add_option("--set", p_set, "extra key=value settings, applied after the file");
  pipeline->add_option("--threads", p_threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : bc::kExitUsage;
  }

  try {
    if (*synth) {
      bc::cmd_synth(bc::scene_preset(preset, seed), synth_edge, synth_out);
    } else if (*labelgen) {
      bc::cmd_labelgen(lg_in, lg_edge, lg_out, lg_dots);
    } else if (*tile) {
      const auto size = bc::in_stage("tile", [&] { return bc::parse_size(tile_patch); });
      const auto grid = bc::cmd_tile(tile_in, size, tile_overlap, tile_out);
      std::printf("%zu patches\n", grid.size());
    } else if (*stitch) {
      bc::cmd_stitch(st_grid, st_dir, st_out, threads);
    } else if (*components) {
      bc::cmd_components(cc_mask, cc_out);
    } else if (*filter) {
      fcfg.axis = !no_axis;
      fcfg.area = !no_area;
      fcfg.edge = !no_edge;
      const auto r = bc::cmd_filter(f_in, fcfg, f_report, f_out);
      for (const auto& s : r.stages) {
        std::printf("%s: %zu -> %zu\n", s.stage.c_str(), s.input, s.input - s.removed);
      }
    } else if (*evaluate) {
      const auto size = bc::in_stage("evaluate", [&] { return bc::parse_size(ev_patch); });
      const auto mode = bc::in_stage("evaluate", [&] { return fit_mode(ev_fit); });
      print_summary(bc::cmd_evaluate(ev_pred, ev_ref, ev_dots, size, ev_kept, mode, ev_out, ev_plot, ev_counts));
    } else if (*pipeline) {
      const auto cfg = bc::in_stage("config", [&] {
        std::string text = p_config.empty() ? std::string() : bc::read_file(p_config);
        for (const auto& kv : p_set) text += "\n" + kv;
        if (p_threads > 0) text += "\nthreads=" + std::to_string(p_threads);
        return bc::parse_config(text);
      });
      print_summary(bc::cmd_pipeline(cfg).report);
    }
  } catch (const bc::StageError& e) {
    std::fprintf(stderr, "error[%s]: %s\n", e.stage().c_str(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[internal]: %s\n", e.what());
    return bc::kExitData;
  }
  return 0;
}
