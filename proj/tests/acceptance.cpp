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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vmgraph/error.hpp"
#include "vmgraph/fixture.hpp"
#include "vmgraph/formats.hpp"
#include "vmgraph/pipeline.hpp"
#include "vmgraph/reenact_assembly.hpp"

using namespace vmg;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Recomputes a path cost from the graph alone.
double recompute_cost(const VideoMotionGraph& g, const PathCandidate& p, const SegmentList& segs,
                      double duration_weight) {
  double transition = 0.0;
  for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
    const GraphEdge* e = g.find_edge(p.nodes[i], p.nodes[i + 1]);
    if (!e) return std::numeric_limits<double>::infinity();
    transition += e->d_feat + e->d_img;
  }
  double duration = 0.0;
  for (std::size_t s = 0; s < segs.segment_count(); ++s) {
    const double achieved = static_cast<double>(p.segment_boundaries[s + 1] - p.segment_boundaries[s]);
    duration += duration_weight * std::abs(1.0 - achieved / static_cast<double>(segs.length(s)));
  }
  return transition + duration;
}

struct AuditLog {
  std::size_t paths = 0;
  double worst = 0.0;
};

void audit(AuditLog& log, const VideoMotionGraph& g, const std::vector<PathCandidate>& paths,
           const SegmentList& segs, double dw) {
  for (const PathCandidate& p : paths) {
    ++log.paths;
    log.worst = std::max(log.worst, std::abs(recompute_cost(g, p, segs, dw) - p.total_cost()));
  }
}

SegmentList random_segments(std::mt19937_64& rng, std::size_t count) {
  std::uniform_int_distribution<std::size_t> len(2, 4);
  std::uniform_int_distribution<int> kind(0, 3);
  SegmentList s;
  s.endpoints = {1};
  for (std::size_t i = 0; i < count; ++i) {
    s.endpoints.push_back(s.endpoints.back() + len(rng));
    if (i + 1 == count) {
      s.features.push_back(TargetFeature::end());
    } else {
      s.features.push_back(kind(rng) == 0 ? TargetFeature::word(i % 2 ? "here" : "hello")
                                          : TargetFeature::onset());
    }
  }
  s.total_frames = s.endpoints.back();
  return s;
}

Verdict search_oracle(AuditLog& log) {
  Verdict v;
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::size_t> size(6, 15);
  std::uniform_int_distribution<std::size_t> seg_count(1, 3);
  std::size_t compared = 0;
  double search_time = 0.0;
  for (int trial = 0; compared < 60 && trial < 400; ++trial) {
    const VideoMotionGraph built = oracle::random_graph(rng, size(rng), 0.2);
    // Search the graph as read back from its file bytes.
    const VideoMotionGraph g = load_graph(save_graph(built));
    const SegmentList segs = random_segments(rng, seg_count(rng));
    BeamConfig cfg;
    cfg.beam_width = 1'000'000;
    cfg.seed = static_cast<std::uint64_t>(trial);
    if (trial % 3 == 1) cfg.window_low = 0.6, cfg.window_high = 1.5;
    if (trial % 5 == 4) cfg.blend_margin = 1;
    const oracle::BruteResult brute = oracle::brute_force(g, segs, cfg);
    if (brute.feasible == 0) continue;
    const auto t0 = Clock::now();
    const SearchResult r = beam_search(g, segs, cfg);
    search_time += seconds_since(t0);
    ++compared;
    if (r.empty()) {
      v.fail("trial " + std::to_string(trial) + ": search found nothing");
      continue;
    }
    if (r.best().total_cost() != brute.best) {
      std::ostringstream os;
      os.precision(17);
      os << "trial " << trial << ": search " << r.best().total_cost() << " vs brute force " << brute.best;
      v.fail(os.str());
    }
    audit(log, g, r.paths, segs, cfg.duration_weight);
  }
  if (compared < 50) v.fail("only " + std::to_string(compared) + " feasible graphs");
  if (search_time >= 5.0) v.fail("search took " + std::to_string(search_time) + " s");
  if (v.pass) {
    std::ostringstream os;
    os << compared << " graphs exact, search time " << search_time << " s";
    v.detail = os.str();
  }
  return v;
}

Verdict thresholds() {
  Verdict v;
  FixtureConfig c;
  c.reference_frames = 200;
  c.target_frames = 30;
  const PoseTrack track = make_reference(c).track;
  const auto states = compute_joint_states(track.skeleton, track.sequence);
  const auto masks = rasterize_track(track, states);
  AudioFeatureTrack features;
  features.frames.resize(200);
  const VideoMotionGraph g = build_reference_graph(track, features);
  const Thresholds th = g.thresholds();

  double feat_sum = 0.0;
  double img_sum = 0.0;
  for (std::size_t m = 0; m + 4 < 200; ++m) {
    feat_sum += oracle::feat(states[m], states[m + 4], 1.0);
    img_sum += oracle::iou_distance(masks[m], masks[m + 4]);
  }
  const double tf = feat_sum / 196.0;
  const double ti = img_sum / 196.0;
  if (std::abs(tf - th.tau_feat) > 1e-9) v.fail("tau_feat differs from the direct mean");
  if (std::abs(ti - th.tau_img) > 1e-9) v.fail("tau_img differs from the direct mean");

  std::size_t expected = 0;
  for (std::size_t m = 0; m < 200; ++m) {
    for (std::size_t n = 0; n < 200; ++n) {
      if ((m > n ? m - n : n - m) < 2) continue;
      // The image gate only matters when the pose gate passes.
      bool pass = oracle::feat(states[m], states[n], 1.0) <= th.tau_feat;
      if (pass) pass = oracle::iou_distance(masks[m], masks[n]) <= th.tau_img;
      const GraphEdge* e = g.find_edge(m, n);
      if (pass != (e != nullptr && e->kind == EdgeKind::kSynthetic)) {
        v.fail("edge set mismatch at " + std::to_string(m) + "->" + std::to_string(n));
      }
      expected += pass;
    }
  }
  if (g.synthetic_edge_count() != expected) v.fail("synthetic edge count mismatch");
  if (v.pass) {
    std::ostringstream os;
    os << "tau_feat " << th.tau_feat << ", tau_img " << th.tau_img << ", " << expected
       << " synthetic edges rechecked";
    v.detail = os.str();
  }
  return v;
}

Verdict iou() {
  Verdict v;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int pair = 0; pair < 1000; ++pair) {
    SilhouetteMask a(64, 64);
    SilhouetteMask b(64, 64);
    const double da = u(rng);
    const double db = pair % 10 == 0 ? 0.0 : u(rng);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        if (u(rng) < da) a.set(x, y);
        if (u(rng) < db) b.set(x, y);
      }
    }
    const double d = image_distance(a, b);
    if (d != oracle::iou_distance(a, b)) v.fail("pair " + std::to_string(pair) + " differs from pixel count");
    if (!(d >= 0.0 && d <= 1.0)) v.fail("distance out of range");
    if (d != image_distance(b, a)) v.fail("asymmetric distance");
    if (image_distance(a, a) != 0.0) v.fail("nonzero self distance");
  }
  if (v.pass) v.detail = "1000 pairs exact";
  return v;
}

Verdict disk_area() {
  Verdict v;
  CameraModel cam;
  cam.focal_length = 512.0;
  double worst = 0.0;
  for (double r : {0.1, 0.15, 0.2, 0.25, 0.3}) {
    for (double z : {3.0, 4.0, 5.0, 6.0}) {
      Skeleton sk({{"ball", std::nullopt, Vec3::Zero(), r}});
      const SilhouetteMask m = rasterize_silhouette(sk, std::vector<Vec3>{Vec3(0, 0, z)}, cam);
      // Outline of a sphere seen on axis: radius f r / sqrt(z^2 - r^2).
      const double pr = cam.focal_length * r / std::sqrt(z * z - r * r);
      const double err = std::abs(static_cast<double>(m.count()) / (std::numbers::pi * pr * pr) - 1.0);
      worst = std::max(worst, err);
      if (err > 0.02) v.fail("r=" + std::to_string(r) + " z=" + std::to_string(z) + " off by " + std::to_string(err));
    }
  }
  if (v.pass) v.detail = "20 combinations, worst relative error " + std::to_string(worst);
  return v;
}

Verdict blend_contract() {
  Verdict v;
  FixtureConfig c;
  c.reference_frames = 120;
  c.target_frames = 30;
  const MotionSequence seq = make_reference(c).track.sequence;
  for (int k : {1, 2, 4, 8}) {
    const BlendSchedule b = make_blend_schedule(seq, 30, 80, k);
    if (b.steps.size() != static_cast<std::size_t>(2 * k + 1)) v.fail("wrong slot count");
    for (std::size_t i = 0; i < b.steps.size(); ++i) {
      if (b.steps[i].alpha != static_cast<double>(i) / (2.0 * k)) v.fail("alpha grid off");
    }
    if (!(b.steps.front().pose == seq[30 - k]) || !(b.steps.back().pose == seq[80 + k])) {
      v.fail("endpoint poses not bit-exact for k=" + std::to_string(k));
    }
    if (b.blended_frame_count() != static_cast<std::size_t>(2 * k)) v.fail("blended count off");
  }
  if (make_blend_schedule(seq, 30, 80, 4).blended_frame_count() != 8) v.fail("k=4 is not 8 frames");
  if (v.pass) v.detail = "k in {1,2,4,8} exact, k=4 blends 8 frames";
  return v;
}

VideoMotionGraph chain_with_onset(std::size_t n, std::size_t onset) {
  std::vector<GraphNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i].frame_index = i;
  nodes[onset].onset = true;
  std::vector<GraphEdge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, EdgeKind::kNatural, 0, 0});
  return VideoMotionGraph(std::move(nodes), std::move(edges), {1, 1, 4});
}

Verdict duration_window() {
  Verdict v;
  const BeamConfig cfg;
  std::ostringstream os;
  for (std::size_t L : {10u, 100u, 333u}) {
    const std::size_t lo = cfg.min_length(L);
    const std::size_t hi = cfg.max_length(L);
    const auto ceil_lo = static_cast<std::size_t>(std::ceil(0.9 * L - 1e-9));
    const auto floor_hi = static_cast<std::size_t>(std::floor(1.1 * L + 1e-9));
    if (lo != ceil_lo || hi != floor_hi) v.fail("bounds at L=" + std::to_string(L));
    PathCandidate start;
    start.nodes = {0};
    for (std::size_t len = lo > 3 ? lo - 3 : 1; len <= hi + 3; ++len) {
      const VideoMotionGraph g = chain_with_onset(hi + 10, len);
      bool found = false;
      try {
        const auto out = expand_segment(g, std::span(&start, 1), TargetFeature::onset(), L, cfg);
        found = !out.empty();
        for (const auto& p : out) {
          const double ratio = static_cast<double>(p.achieved_lengths()[0]) / static_cast<double>(L);
          if (ratio < 0.9 - 1e-12 || ratio > 1.1 + 1e-12) v.fail("returned a candidate outside the window");
        }
      } catch (const SegmentUnreachableError&) {
      }
      if (found != (len >= lo && len <= hi)) v.fail("length " + std::to_string(len) + " at L=" + std::to_string(L));
    }
    os << "L=" << L << " accepts [" << lo << ", " << hi << "] (floor(0.9L)=" << static_cast<std::size_t>(std::floor(0.9 * L))
       << ") ";
  }
  if (v.pass) v.detail = os.str();
  return v;
}

Verdict onsets() {
  Verdict v;
  const double fps = 30.0;
  std::size_t clicks = 0;
  for (double rate : {1.0, 2.0, 4.0}) {
    const double duration = 10.0;
    const AudioClip base = metronome(rate, duration);
    std::vector<std::size_t> reference;
    for (double c : {0.1, 1.0, 10.0}) {
      AudioClip clip = base;
      for (double& s : clip.samples) s *= c;
      const auto found = detect_onsets(clip.samples, clip.sample_rate, fps).activated_frames();
      if (c == 0.1) {
        reference = found;
      } else if (found != reference) {
        v.fail("activations change under scaling at rate " + std::to_string(rate));
      }
    }
    std::size_t expected = 0;
    for (std::size_t i = 0;; ++i) {
      const double t = (static_cast<double>(i) + 0.5) / rate;
      if (t >= duration) break;
      ++expected;
      const double frame = t * fps;
      const bool hit = std::any_of(reference.begin(), reference.end(), [&](std::size_t f) {
        return std::abs(static_cast<double>(f) - frame) <= 1.0;
      });
      if (!hit) v.fail("missed click at " + std::to_string(t) + " s, rate " + std::to_string(rate));
    }
    clicks += expected;
    if (reference.size() != expected) {
      v.fail(std::to_string(reference.size()) + " activations for " + std::to_string(expected) + " clicks");
    }
  }
  const std::vector<double> silence(16000 * 5, 0.0);
  if (!detect_onsets(silence, 16000, fps).activated_frames().empty()) v.fail("activations on silence");
  if (v.pass) v.detail = std::to_string(clicks) + " clicks recovered, silence quiet, scale invariant";
  return v;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + VMGRAPH_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict end_to_end(AuditLog& log) {
  Verdict v;
  const fs::path work = fs::temp_directory_path() / "vmgraph_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  if (run_cli("make-fixture --out " + (work / "fixture").string()) != 0) {
    v.fail("make-fixture failed");
    return v;
  }
  double slowest = 0.0;
  for (const char* out : {"a", "b"}) {
    const auto t0 = Clock::now();
    const int code = run_cli("run --fixture " + (work / "fixture").string() + " --out-dir " +
                             (work / out).string() + " --seed 7");
    slowest = std::max(slowest, seconds_since(t0));
    if (code != 0) {
      v.fail(std::string("run ") + out + " exited with " + std::to_string(code));
      return v;
    }
  }
  for (const char* f : {"graph.vmg", "path.json", "edl.json"}) {
    if (read_file(work / "a" / f) != read_file(work / "b" / f)) v.fail(std::string(f) + " differs between runs");
  }
  if (slowest >= 60.0) v.fail("run took " + std::to_string(slowest) + " s");

  const VideoMotionGraph g = load_graph_file(work / "a" / "graph.vmg");
  const SearchDocument doc = search_from_json(read_json_file(work / "a" / "path.json"));
  audit(log, g, doc.result.paths, doc.segments, doc.config.duration_weight);
  if (v.pass) {
    std::ostringstream os;
    os << "identical outputs, slowest run " << slowest << " s, " << doc.result.paths.size() << " paths";
    v.detail = os.str();
  }
  return v;
}

}  // namespace

int main() {
  std::cout << std::unitbuf;
  AuditLog log;
  bool all = true;
  auto report = [&](int id, const char* name, auto&& check) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    all = all && v.pass;
    std::cout << "criterion " << id << " " << (v.pass ? "PASS" : "FAIL") << " " << name << ": " << v.detail << "\n";
  };
  report(1, "search matches brute force", [&] { return search_oracle(log); });
  report(2, "threshold reproduction", thresholds);
  report(3, "IoU correctness", iou);
  report(4, "rasterizer disk area", disk_area);
  report(5, "blend schedule", blend_contract);
  report(6, "duration window", duration_window);
  report(7, "onset detector", onsets);
  report(8, "end-to-end determinism", [&] { return end_to_end(log); });
  report(9, "cost audit", [&] {
    Verdict v;
    if (log.paths == 0) v.fail("no paths to audit");
    if (log.worst > 1e-9) v.fail("worst deviation " + std::to_string(log.worst));
    if (v.pass) {
      std::ostringstream os;
      os << log.paths << " paths, worst deviation " << log.worst;
      v.detail = os.str();
    }
    return v;
  });
  return all ? 0 : 1;
}
