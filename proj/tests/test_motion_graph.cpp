// Copyright 2026 The vmgraph Authors
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

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vmgraph/error.hpp"
#include "vmgraph/motion_graph.hpp"

using namespace vmg;

namespace {

struct Toy {
  Skeleton skeleton;
  std::vector<JointState> states;
  std::vector<SilhouetteMask> masks;
  std::vector<FrameFeature> features;
};

// Two-joint arm swinging with growing angular speed while drifting in x.
Toy toy(std::size_t n, double accel = 0.01) {
  Toy t;
  t.skeleton = Skeleton({{"root", std::nullopt, Vec3::Zero(), 0.1}, {"tip", 0, Vec3(1, 0, 0), 0.1}});
  std::vector<PoseFrame> frames;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i);
    frames.push_back({i, Vec3(0.02 * x, 0, 0), {Vec3(0, 0, 0.05 * x + accel * x * x), Vec3::Zero()}});
  }
  t.states = compute_joint_states(t.skeleton, MotionSequence(30, frames));
  CameraModel cam;
  cam.translation = Vec3(0, 0, 4);
  for (const JointState& s : t.states) t.masks.push_back(rasterize_silhouette(t.skeleton, s.positions, cam));
  t.features.resize(n);
  return t;
}

// Periodic swing, so many frame pairs repeat.
Toy periodic(std::size_t n) {
  Toy t = toy(n);
  std::vector<PoseFrame> frames;
  for (std::size_t i = 0; i < n; ++i) {
    frames.push_back({i, Vec3::Zero(), {Vec3(0, 0, 0.9 * std::sin(0.4 * i)), Vec3(0, 0, 0.3 * std::cos(0.9 * i))}});
  }
  t.states = compute_joint_states(t.skeleton, MotionSequence(30, frames));
  CameraModel cam;
  cam.translation = Vec3(0, 0, 4);
  t.masks.clear();
  for (const JointState& s : t.states) t.masks.push_back(rasterize_silhouette(t.skeleton, s.positions, cam));
  return t;
}

std::size_t count_synthetic(const VideoMotionGraph& g) { return g.synthetic_edge_count(); }

}  // namespace

TEST_CASE("thresholds") {
  SUBCASE("constant pose gives zero thresholds") {
    Toy t = toy(12);
    for (auto& s : t.states) s = t.states[0];
    for (auto& m : t.masks) m = t.masks[0];
    const Thresholds th = compute_thresholds(t.states, t.masks);
    CHECK(th.tau_feat == 0.0);
    CHECK(th.tau_img == 0.0);
    CHECK(th.offset_l == 4);
  }
  SUBCASE("20-frame toy equals the mean of its 16 offset pairs") {
    const Toy t = toy(20);
    const Thresholds th = compute_thresholds(t.states, t.masks);
    // Mean of the 16 d_feat values computed outside the library.
    CHECK(std::abs(th.tau_feat - 1.1317789522205686) < 1e-9);
    double img = 0;
    for (std::size_t m = 0; m + 4 < 20; ++m) img += oracle::iou_distance(t.masks[m], t.masks[m + 4]);
    CHECK(std::abs(th.tau_img - img / 16.0) < 1e-12);
  }
  SUBCASE("larger offsets give larger thresholds on accelerating motion") {
    const Toy t = toy(60, 0.002);
    Thresholds prev = compute_thresholds(t.states, t.masks, 1);
    for (int l = 2; l <= 8; ++l) {
      const Thresholds th = compute_thresholds(t.states, t.masks, l);
      CHECK(th.tau_feat >= prev.tau_feat);
      CHECK(th.tau_img >= prev.tau_img);
      prev = th;
    }
  }
  const Toy t = toy(4);
  CHECK_THROWS_AS(compute_thresholds(t.states, t.masks, 4), ValidationError);
  CHECK_THROWS_AS(compute_thresholds(t.states, t.masks, 0), ValidationError);
  CHECK_THROWS_AS(compute_thresholds(t.states, std::span(t.masks).first(3)), StructuralError);
}

TEST_CASE("graph construction gates") {
  const Toy t = toy(10);
  SUBCASE("closed gate leaves the natural chain") {
    const VideoMotionGraph g = build_graph(t.states, t.masks, t.features, {0.0, 0.0, 4});
    CHECK(g.edge_count() == 9);
    CHECK(count_synthetic(g) == 0);
  }
  SUBCASE("open gate connects every pair at least two frames apart") {
    const double inf = std::numeric_limits<double>::infinity();
    const VideoMotionGraph g = build_graph(t.states, t.masks, t.features, {inf, 1.0, 4});
    CHECK(count_synthetic(g) == 72);
    std::size_t expected = 0;
    for (std::size_t m = 0; m < 10; ++m) {
      for (std::size_t n = 0; n < 10; ++n) {
        if ((m > n ? m - n : n - m) >= 2) ++expected;
      }
    }
    CHECK(count_synthetic(g) == expected);
  }
  SUBCASE("min jump 1 also allows backward steps") {
    const double inf = std::numeric_limits<double>::infinity();
    GraphBuildOptions o;
    o.min_jump = 1;
    const VideoMotionGraph g = build_graph(t.states, t.masks, t.features, {inf, 1.0, 4}, o);
    CHECK(count_synthetic(g) == 81);
  }
  CHECK_THROWS_AS(build_graph(t.states, t.masks, std::span(t.features).first(5), {1, 1, 4}),
                  StructuralError);
}

TEST_CASE("synthetic edges are exactly the pairs passing both gates") {
  const Toy t = periodic(80);
  const Thresholds th = compute_thresholds(t.states, t.masks);
  const VideoMotionGraph g = build_graph(t.states, t.masks, t.features, th);
  CHECK(count_synthetic(g) > 0);
  std::size_t expected = 0;
  for (std::size_t m = 0; m < 80; ++m) {
    for (std::size_t n = 0; n < 80; ++n) {
      if (n == m + 1 || m == n || (m > n ? m - n : n - m) < 2) continue;
      const double f = oracle::feat(t.states[m], t.states[n], 1.0);
      const double i = oracle::iou_distance(t.masks[m], t.masks[n]);
      const bool pass = f <= th.tau_feat && i <= th.tau_img;
      const GraphEdge* e = g.find_edge(m, n);
      CHECK((e != nullptr) == pass);
      if (pass) {
        ++expected;
        CHECK(e->kind == EdgeKind::kSynthetic);
        CHECK(std::abs(e->d_feat - f) < 1e-12);
        CHECK(e->d_img == i);
      }
    }
  }
  CHECK(count_synthetic(g) == expected);
  CHECK(g == build_graph(t.states, t.masks, t.features, th));

  // Raising either threshold keeps every edge.
  const VideoMotionGraph wider =
      build_graph(t.states, t.masks, t.features, {th.tau_feat * 1.3, th.tau_img * 1.2, 4});
  for (const GraphEdge& e : g.edges()) CHECK(wider.find_edge(e.src, e.dst) != nullptr);
}

TEST_CASE("graph validation") {
  auto nodes = [](std::size_t n) {
    std::vector<GraphNode> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i].frame_index = i;
    return v;
  };
  const std::vector<GraphEdge> chain{{0, 1, EdgeKind::kNatural, 0, 0}, {1, 2, EdgeKind::kNatural, 0, 0},
                                     {2, 3, EdgeKind::kNatural, 0, 0}};
  CHECK_NOTHROW(VideoMotionGraph(nodes(4), chain, {1, 1, 4}));
  auto with = [&](GraphEdge e) {
    auto edges = chain;
    edges.push_back(e);
    return edges;
  };
  CHECK_THROWS_AS(VideoMotionGraph(nodes(4), {chain[0], chain[1]}, {1, 1, 4}), StructuralError);
  CHECK_THROWS_AS(VideoMotionGraph(nodes(4), with({2, 2, EdgeKind::kSynthetic, 0.1, 0.1}), {1, 1, 4}),
                  StructuralError);
  CHECK_THROWS_AS(VideoMotionGraph(nodes(4), with({0, 1, EdgeKind::kNatural, 0, 0}), {1, 1, 4}),
                  StructuralError);
  CHECK_THROWS_AS(VideoMotionGraph(nodes(4), with({3, 0, EdgeKind::kSynthetic, 2.0, 0.1}), {1, 1, 4}),
                  StructuralError);
  CHECK_THROWS_AS(VideoMotionGraph(nodes(4), with({2, 1, EdgeKind::kSynthetic, 0.1, 0.1}), {1, 1, 4}),
                  StructuralError);
  CHECK_THROWS_AS(VideoMotionGraph(nodes(4), with({0, 9, EdgeKind::kSynthetic, 0.1, 0.1}), {1, 1, 4}),
                  StructuralError);

  const VideoMotionGraph g(nodes(4), with({3, 0, EdgeKind::kSynthetic, 0.5, 0.25}), {1, 1, 4});
  CHECK(g.find_edge(3, 0)->cost() == 0.75);
  CHECK(g.find_edge(0, 3) == nullptr);
  CHECK(g.out_edges(3).size() == 1);
  CHECK(g.out_edges(0).size() == 1);
}

TEST_CASE("graph serialization") {
  SUBCASE("three-frame round trip") {
    std::vector<GraphNode> nodes{{0, false, ""}, {1, true, ""}, {2, false, ""}};
    const VideoMotionGraph g(nodes, {{0, 1, EdgeKind::kNatural, 0, 0}, {1, 2, EdgeKind::kNatural, 0, 0}},
                             {0.25, 0.5, 4});
    const auto bytes = save_graph(g);
    CHECK(load_graph(bytes) == g);
    for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
      CHECK_THROWS_AS(load_graph(std::span(bytes).first(cut)), ParseError);
    }
    auto extra = bytes;
    extra.push_back(0);
    CHECK_THROWS_AS(load_graph(extra), ParseError);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(load_graph(bad), ParseError);
  }
  SUBCASE("truncation reports the offset") {
    std::vector<GraphNode> nodes{{0, false, "hello"}, {1, false, ""}};
    const auto bytes = save_graph(VideoMotionGraph(nodes, {{0, 1, EdgeKind::kNatural, 0, 0}}, {1, 1, 4}));
    try {
      load_graph(std::span(bytes).first(bytes.size() - 3));
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.offset() == bytes.size() - 4);
    }
  }
  SUBCASE("1000-node random graph") {
    std::mt19937_64 rng(4);
    const VideoMotionGraph g = oracle::random_graph(rng, 1000, 0.01);
    const auto bytes = save_graph(g);
    const VideoMotionGraph back = load_graph(bytes);
    CHECK(back == g);
    CHECK(back.edge_count() == g.edge_count());
    CHECK(save_graph(back) == bytes);
  }
}
