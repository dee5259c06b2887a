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

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <set>

#include "berrycount/filters.hpp"
#include "berrycount/instancer.hpp"
#include "berrycount/metrics.hpp"
#include "berrycount/synth.hpp"
#include "oracles.hpp"

namespace berrycount {
namespace {

struct Desc {
  long area_px;
  double a_maj;
  double a_min;
  double enclosure;
  int tag = 0;
};

Component from_pixels(const std::vector<Pixel>& px) {
  SemanticMask m(80, 80, Class::Background);
  for (const Pixel& p : px) m[p] = Class::Berry;
  return compute_descriptors(px, m);
}

TEST(FilterAxis, Thresholds) {
  const FilterConfig cfg;
  EXPECT_TRUE(passes_axis(Desc{300, 10, 10, 1}, cfg));
  EXPECT_FALSE(passes_axis(Desc{30, 20, 2, 1}, cfg));
  EXPECT_FALSE(passes_axis(Desc{30, 10, 3, 1}, cfg));  // exactly 0.3 is discarded
  EXPECT_TRUE(passes_axis(Desc{30, 10, 3.0001, 1}, cfg));
}

TEST(FilterArea, FilledDiskIsKept) {
  const auto disk = from_pixels(oracle::disk_pixels(40, 40, 10.0));
  EXPECT_NEAR(disk.area_px / circle_area(disk), 1.0, 0.05);
  EXPECT_TRUE(passes_area(disk, FilterConfig{}));
}

TEST(FilterArea, CrescentArcIsDiscarded) {
  // 1 px wide half arc of a radius-10 circle
  std::vector<Pixel> arc;
  for (const Pixel& p : oracle::annulus_pixels(40, 40, 10.0, 9.0))
    if (p.y <= 40) arc.push_back(p);
  const auto ref = oracle::raw_moment_axes(arc);
  const double r = (ref.a_maj + ref.a_min) / 4.0;
  const double ratio = ref.area / (std::numbers::pi * r * r);
  ASSERT_LT(ratio, 0.3);
  EXPECT_FALSE(passes_area(from_pixels(arc), FilterConfig{}));
}

TEST(FilterArea, RingIsDiscarded) {
  const auto ring = oracle::annulus_pixels(40, 40, 10.0, 9.0);
  const auto ref = oracle::raw_moment_axes(ring);
  const double r = (ref.a_maj + ref.a_min) / 4.0;
  ASSERT_LT(ref.area / (std::numbers::pi * r * r), 0.3);
  const auto c = from_pixels(ring);
  EXPECT_TRUE(passes_axis(c, FilterConfig{}));  // round by its axes
  EXPECT_FALSE(passes_area(c, FilterConfig{}));
}

TEST(FilterEdge, Thresholds) {
  const FilterConfig cfg;
  EXPECT_TRUE(passes_edge(Desc{10, 5, 5, 1.0}, cfg));
  EXPECT_FALSE(passes_edge(Desc{10, 5, 5, 0.0}, cfg));
  EXPECT_TRUE(passes_edge(Desc{10, 5, 5, 0.5}, cfg));
  EXPECT_TRUE(passes_edge(Desc{10, 5, 5, 0.4}, cfg));
}

std::vector<Desc> random_descs(Rng& rng, int n) {
  std::vector<Desc> out;
  for (int i = 0; i < n; ++i) {
    const double maj = rng.uniform(1.0, 30.0);
    const double mn = maj * rng.uniform(0.05, 1.0);
    const double circle = std::numbers::pi * std::pow((maj + mn) / 4.0, 2);
    out.push_back({std::max(1L, std::lround(circle * rng.uniform(0.05, 1.3))), maj, mn, rng.uniform(), i});
  }
  return out;
}

TEST(RunPipeline, AllStagesOffIsIdentity) {
  Rng rng(1);
  const auto in = random_descs(rng, 50);
  const auto r = run_pipeline(in, FilterConfig::none());
  ASSERT_EQ(r.kept.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(r.kept[i].tag, in[i].tag);
  for (const auto& s : r.stages) EXPECT_EQ(s.removed, 0u);
}

TEST(RunPipeline, IdempotentOrderPreservingAndCounted) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto in = random_descs(rng, 60);
    const auto once = run_pipeline(in, FilterConfig{});
    const auto twice = run_pipeline(once.kept, FilterConfig{});
    ASSERT_EQ(twice.kept.size(), once.kept.size());
    for (std::size_t i = 0; i < once.kept.size(); ++i) EXPECT_EQ(twice.kept[i].tag, once.kept[i].tag);
    for (std::size_t i = 1; i < once.kept.size(); ++i) EXPECT_LT(once.kept[i - 1].tag, once.kept[i].tag);
    std::size_t removed = 0;
    for (const auto& s : once.stages) removed += s.removed;
    EXPECT_EQ(in.size() - removed, once.kept.size());
    ASSERT_EQ(once.stages.size(), 3u);
    EXPECT_EQ(once.stages[0].stage, "axis");
    EXPECT_EQ(once.stages[1].stage, "area");
    EXPECT_EQ(once.stages[2].stage, "edge");
  }
}

TEST(RunPipeline, MonotoneInThresholds) {
  Rng rng(3);
  const auto in = random_descs(rng, 200);
  for (int trial = 0; trial < 30; ++trial) {
    FilterConfig lo{rng.uniform(0, 0.5), rng.uniform(0, 0.5), rng.uniform(0, 0.5)};
    FilterConfig hi = lo;
    hi.axis_ratio_min += rng.uniform(0, 0.5);
    hi.area_ratio_min += rng.uniform(0, 0.5);
    hi.enclosure_min += rng.uniform(0, 0.5);
    const auto a = run_pipeline(in, lo).kept;
    const auto b = run_pipeline(in, hi).kept;
    std::set<int> tags;
    for (const auto& d : a) tags.insert(d.tag);
    EXPECT_LE(b.size(), a.size());
    for (const auto& d : b) EXPECT_TRUE(tags.contains(d.tag));
  }
}

TEST(RunPipeline, RejectsThresholdsOutsideUnitInterval) {
  FilterConfig cfg;
  cfg.area_ratio_min = 1.5;
  EXPECT_THROW(run_pipeline(std::vector<Desc>{}, cfg), ConfigError);
}

TEST(RunPipeline, SubsetChainOnCorruptedScene) {
  SceneSpec spec;
  spec.width = 400;
  spec.height = 300;
  spec.seed = 1;
  spec.radius_min = 5;
  spec.radius_max = 12;
  spec.berries_min = 20;
  spec.berries_max = 30;
  const Scene scene = generate_scene(spec);
  const auto truth = synthesize_labels(scene.instances, EdgeWidth(2));
  const auto pred = corrupt(truth, scene.instances, CorruptionSpec{0.2, 3.0, 10, 1, 1});
  const auto comps = connected_components(pred);
  const auto r = run_pipeline(comps, FilterConfig{});
  auto ids = [](const std::vector<Component>& v) {
    std::set<int> s;
    for (const auto& c : v) s.insert(c.id);
    return s;
  };
  const auto axis = ids(r.after_stage[0]), area = ids(r.after_stage[1]), edge = ids(r.after_stage[2]);
  EXPECT_TRUE(std::includes(axis.begin(), axis.end(), area.begin(), area.end()));
  EXPECT_TRUE(std::includes(area.begin(), area.end(), edge.begin(), edge.end()));
  EXPECT_GT(comps.size(), r.kept.size());
}

TEST(StageReport, Format) {
  const std::vector<StageCount> s{{"axis", true, 10, 2}, {"area", false, 8, 0}, {"edge", true, 8, 1}};
  EXPECT_EQ(format_stage_report(s), "stage,enabled,input,removed,kept\naxis,1,10,2,8\narea,0,8,0,8\nedge,1,8,1,7\n");
}

}  // namespace
}  // namespace berrycount
