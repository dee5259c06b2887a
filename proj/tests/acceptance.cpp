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

// Acceptance runner. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>

#include "berrycount/berrycount.hpp"
#include "oracles.hpp"

using namespace berrycount;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void run(int number, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", number, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1
Outcome f1_arithmetic() {
  const double rows[][3] = {{85.41, 93.90, 89.46}, {81.21, 92.59, 86.53}, {80.54, 89.00, 84.56}, {78.65, 85.26, 81.82}};
  double worst = 0.0;
  for (const auto& r : rows) {
    // a tally whose precision and recall are exactly the tabulated pair
    const auto p = static_cast<std::size_t>(std::lround(r[0] * 100));
    const auto q = static_cast<std::size_t>(std::lround(r[1] * 100));
    const DetectionMetrics m = metrics_from_tally({q * 10000, p * 10000, p * q});
    worst = std::max(worst, std::abs(100.0 * m.f1 - r[2]));
  }
  return {worst <= 0.01, fmt("max |F1 - table| = %.4f over 4 rows", worst)};
}

// 2
Outcome grid_arithmetic() {
  const PatchGrid g = plan_grid(2592, 2048, 432, 256, 0.5);
  int min_cov = 1 << 30, max_cov = 0;
  for (int y = 432; y < 2048 - 432; y += 7)
    for (int x = 432; x < 2592 - 432; x += 7) {
      const int c = coverage(g, x, y);
      min_cov = std::min(min_cov, c);
      max_cov = std::max(max_cov, c);
    }
  const bool ok = g.size() == 165 && g.stride_x == 216 && g.stride_y == 128 && min_cov == 4 && max_cov == 4;
  return {ok, fmt("%zu patches, stride (%d, %d), interior coverage %d..%d", g.size(), g.stride_x, g.stride_y,
                  min_cov, max_cov)};
}

struct SceneResult {
  DetectionMetrics det;
  std::optional<FitResult> fit;
};

// generate -> labels -> tile/stitch -> components -> count, in memory
SceneResult oracle_scene(const SceneSpec& spec, int w) {
  const Scene sc = generate_scene(spec);
  const auto labels = synthesize_labels(sc.instances, EdgeWidth(w));
  const auto grid = plan_grid(labels.width(), labels.height(), 432, 256, 0.5);
  const auto mask = stitch(extract(labels, grid), grid, labels.width(), labels.height());
  const auto comps = connected_components(mask);
  SceneResult r;
  r.det = detection_metrics(comps, sc.dots);
  const auto counts = per_patch_counts(comps, sc.dots, 432, 256, mask.width(), mask.height());
  try {
    r.fit = r_squared(counts);
  } catch (const Error&) {
  }
  return r;
}

// 3
Outcome oracle_end_to_end() {
  int bad = 0;
  std::size_t berries = 0;
  for (const char* preset : {"vsp", "smph"}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const SceneSpec spec = scene_preset(preset, seed);
      const auto r = oracle_scene(spec, 2);
      berries += r.det.tally.n_dots;
      const bool ok = r.det.tally.n_components == r.det.tally.n_dots && r.det.precision == 1.0 &&
                      r.det.recall == 1.0 && r.fit && r.fit->r_squared == 1.0;
      if (!ok) {
        ++bad;
        std::printf("       %s seed %llu: components %zu dots %zu P %.4f R %.4f\n", preset,
                    static_cast<unsigned long long>(seed), r.det.tally.n_components, r.det.tally.n_dots,
                    r.det.precision, r.det.recall);
      }
    }
  }
  return {bad == 0, fmt("40 scenes, %zu berries, %d mismatches", berries, bad)};
}

// 4
Outcome separation() {
  int touching = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SceneSpec s;
    s.width = 640;
    s.height = 480;
    s.n_bunches = 4;
    s.berries_min = 30;
    s.berries_max = 50;
    s.radius_min = 4;
    s.radius_max = 16;
    s.ellipticity_min = 0.6;
    s.bunch_spread = 80;
    s.min_core_width = 0;  // keep every visible remnant, countable or not
    s.seed = seed;
    const Scene sc = generate_scene(s);
    for (int w = 1; w <= 3; ++w) {
      if (oracle::cores_touch_8(synthesize_labels(sc.instances, EdgeWidth(w)), sc.instances)) ++touching;
    }
  }
  return {touching == 0, fmt("300 (scene, w) pairs, %d with 8-adjacent cores", touching)};
}

// 5
Outcome stitch_oracle() {
  Rng rng(5);
  int bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int pw = rng.range(4, 40), ph = rng.range(4, 40);
    const int iw = rng.range(pw, 160), ih = rng.range(ph, 160);
    const PatchGrid g = plan_grid(iw, ih, pw, ph, rng.uniform(0.0, 0.8));
    std::vector<SemanticMask> patches;
    for (std::size_t i = 0; i < g.size(); ++i) patches.push_back(oracle::random_mask(rng, pw, ph));
    const auto expected = oracle::brute_force_stitch(patches, g);
    std::vector<std::size_t> perm(g.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    PatchGrid g2 = g;
    std::vector<SemanticMask> p2;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      g2.origins[i] = g.origins[perm[i]];
      p2.push_back(patches[perm[i]]);
    }
    if (stitch(patches, g, iw, ih) != expected || stitch(p2, g2, iw, ih) != expected ||
        stitch(p2, g2, iw, ih, 3) != expected) {
      ++bad;
    }
  }
  return {bad == 0, fmt("50 fixtures, %d disagreements", bad)};
}

// 6
Outcome filter_trend() {
  bool ok = true;
  std::string detail;
  for (const char* preset : {"vsp", "smph"}) {
    std::array<DetectionTally, 4> tally{};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Scene sc = generate_scene(scene_preset(preset, seed));
      const auto labels = synthesize_labels(sc.instances, EdgeWidth(2));
      const auto pred = corrupt(labels, sc.instances, CorruptionSpec{0.1, 3.0, 20, 1, seed});
      const auto comps = connected_components(pred);
      const auto result = run_pipeline(comps, FilterConfig{});
      for (std::size_t k = 0; k < 4; ++k) {
        const auto& set = k == 0 ? comps : result.after_stage[k - 1];
        const auto t = detection_metrics(set, sc.dots).tally;
        tally[k].n_components += t.n_components;
        tally[k].n_dots += t.n_dots;
        tally[k].tp += t.tp;
      }
    }
    std::array<DetectionMetrics, 4> m;
    for (std::size_t k = 0; k < 4; ++k) m[k] = metrics_from_tally(tally[k]);
    for (std::size_t k = 1; k < 4; ++k) ok = ok && m[k].precision >= m[k - 1].precision;
    const double drop = 100.0 * (m[0].recall - m[3].recall);
    ok = ok && drop < 5.0;
    detail += fmt("%s P %.4f, %.4f, %.4f, %.4f; recall drop %.2f pp; ", preset, m[0].precision, m[1].precision,
                  m[2].precision, m[3].precision, drop);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// 7
Outcome small_berries() {
  int lower = 0;
  DetectionTally t2{}, t3{};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SceneSpec s;
    s.width = 640;
    s.height = 480;
    s.n_bunches = 4;
    s.berries_min = 40;
    s.berries_max = 60;
    s.radius_min = 2;
    s.radius_max = 4;
    s.ellipticity_min = 0.8;
    s.bunch_spread = 50;
    s.min_core_width = 2;
    s.seed = seed;
    const Scene sc = generate_scene(s);
    double recall[2];
    for (int w = 2; w <= 3; ++w) {
      const auto comps = connected_components(synthesize_labels(sc.instances, EdgeWidth(w)));
      const auto m = detection_metrics(run_pipeline(comps, FilterConfig{}).kept, sc.dots);
      recall[w - 2] = m.recall;
      auto& t = w == 2 ? t2 : t3;
      t.n_dots += m.tally.n_dots;
      t.tp += m.tally.tp;
    }
    if (recall[1] < recall[0]) ++lower;
  }
  const double r2 = static_cast<double>(t2.tp) / t2.n_dots, r3 = static_cast<double>(t3.tp) / t3.n_dots;
  return {lower == 10, fmt("recall w=2 %.4f, w=3 %.4f; w=3 lower on %d/10 seeds", r2, r3, lower)};
}

// 8
Outcome descriptors() {
  double worst_ratio = 0.0, worst_maj = 0.0;
  for (int r = 5; r <= 30; ++r) {
    const auto px = oracle::disk_pixels(100, 100, r);
    const auto m = moment_axes(px);
    worst_ratio = std::max(worst_ratio, std::abs(m.a_min / m.a_maj - 1.0));
    worst_maj = std::max(worst_maj, std::abs(m.a_maj / (2.0 * r) - 1.0));
  }
  double worst_rect = 0.0;
  for (int w = 2; w <= 40; w += 3)
    for (int h = 1; h <= w; h += 4) {
      std::vector<Pixel> px;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) px.push_back({x + 7, y + 3});
      const auto m = moment_axes(px);
      worst_rect = std::max({worst_rect, std::abs(m.a_maj / (2.0 * w / std::sqrt(3.0)) - 1.0),
                             std::abs(m.a_min / (2.0 * h / std::sqrt(3.0)) - 1.0)});
    }
  const bool ok = worst_ratio <= 0.1 && worst_maj <= 0.1 && worst_rect <= 0.05;
  return {ok, fmt("disks r=5..30: max |ratio-1| %.4f, max a_maj error %.2f%%; rectangles max error %.2f%%",
                  worst_ratio, 100 * worst_maj, 100 * worst_rect)};
}

// 9
Outcome ols_oracle() {
  Rng rng(9);
  double worst = 0.0;
  int fits = 0;
  while (fits < 100) {
    const int n = rng.range(3, 200);
    std::vector<CountRecord> rec;
    std::vector<double> x, y;
    for (int i = 0; i < n; ++i) {
      const int m = rng.range(0, 80);
      const int p = std::max(0, m + rng.range(-10, 10) - rng.range(0, 5));
      rec.push_back({i / 12, i % 12, m, p});
      x.push_back(m);
      y.push_back(p);
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) continue;
    ++fits;
    const auto f = r_squared(rec);
    const auto o = oracle::normal_equations(x, y);
    worst = std::max({worst, std::abs(f.slope - o.slope), std::abs(f.intercept - o.intercept),
                      std::abs(f.r_squared - o.r_squared)});
  }
  std::vector<CountRecord> perfect;
  for (int i = 0; i < 30; ++i) perfect.push_back({0, i, i * 7 % 23, i * 7 % 23});
  const double r2 = r_squared(perfect).r_squared;
  return {worst <= 1e-9 && r2 == 1.0, fmt("100 fits, max deviation %.3g; perfect data R^2 = %.17g", worst, r2)};
}

// 10
Outcome determinism() {
  const std::string dir = oracle::temp_dir("acceptance_determinism");
  cmd_synth(scene_preset("vsp", 42), 2, dir + "/scene");
  PipelineConfig cfg;
  cfg.scene_dir = dir + "/scene";
  cfg.corruption = CorruptionSpec{0.1, 3.0, 20, 1, 42};
  std::vector<std::string> reports, masks;
  int run_no = 0;
  for (int threads : {1, 1, 8, 8}) {
    cfg.threads = threads;
    cfg.out_dir = dir + "/run" + std::to_string(run_no++);
    cmd_pipeline(cfg);
    reports.push_back(read_file(cfg.out_dir + "/report.csv"));
    masks.push_back(read_file(cfg.out_dir + "/mask.pgm"));
  }
  bool ok = true;
  for (std::size_t i = 1; i < reports.size(); ++i) ok = ok && reports[i] == reports[0] && masks[i] == masks[0];
  return {ok, fmt("4 runs (threads 1,1,8,8): report.csv and mask.pgm %s", ok ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
  run(1, "F1 arithmetic", f1_arithmetic);
  run(2, "grid arithmetic", grid_arithmetic);
  run(3, "oracle end-to-end", oracle_end_to_end);
  run(4, "separation invariant", separation);
  run(5, "stitch oracle", stitch_oracle);
  run(6, "filter trend", filter_trend);
  run(7, "small-berry loss", small_berries);
  run(8, "descriptor oracle", descriptors);
  run(9, "OLS oracle", ols_oracle);
  run(10, "determinism", determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
