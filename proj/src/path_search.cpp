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

#include "vmgraph/path_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <string>

#include "vmgraph/error.hpp"

namespace vmg {
namespace {

constexpr double kWindowGuard = 1e-9;

// Natural-run length (in nodes) ending at the last node of `nodes`.
std::size_t trailing_run(std::span<const std::size_t> nodes) {
  std::size_t run = 1;
  for (std::size_t i = nodes.size(); i-- > 1;) {
    if (nodes[i] != nodes[i - 1] + 1) break;
    ++run;
  }
  return run;
}

// A partial path inside one segment expansion.
struct Live {
  std::size_t node;
  std::size_t parent;  // index into the previous depth, or the start index at depth 0
  double transition;   // running transition cost including the start path's
  double base_duration;
  std::uint32_t run;
};

struct Accepted {
  double total;
  double transition;
  double duration;
  std::size_t node;
  std::size_t depth;
  std::size_t index;  // into the live vector at `depth`
};

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

}  // namespace

void BeamConfig::validate() const {
  if (beam_width < 1) throw ValidationError("beam width must be at least 1");
  if (!(window_low > 0.0) || !(window_low <= 1.0) || !(window_high >= 1.0) ||
      !std::isfinite(window_high)) {
    throw ValidationError("duration window must satisfy 0 < low <= 1 <= high");
  }
  if (!(duration_weight >= 0.0) || !std::isfinite(duration_weight)) {
    throw ValidationError("duration weight must be non-negative");
  }
  if (expansion_slack < 0) throw ValidationError("expansion slack must be non-negative");
  if (blend_margin < 0) throw ValidationError("blend margin must be non-negative");
}

std::size_t BeamConfig::min_length(std::size_t target_length) const {
  const double lo = std::ceil(window_low * static_cast<double>(target_length) - kWindowGuard);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max(0.0, lo)));
}

std::size_t BeamConfig::max_length(std::size_t target_length) const {
  const double hi = std::floor(window_high * static_cast<double>(target_length) + kWindowGuard);
  return static_cast<std::size_t>(std::max(0.0, hi));
}

std::size_t BeamConfig::max_expansion_frames(std::size_t target_length) const {
  return static_cast<std::size_t>(std::ceil(window_high * static_cast<double>(target_length) - 1e-9)) +
         static_cast<std::size_t>(expansion_slack);
}

std::vector<std::size_t> PathCandidate::achieved_lengths() const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s + 1 < segment_boundaries.size(); ++s) {
    out.push_back(segment_boundaries[s + 1] - segment_boundaries[s]);
  }
  return out;
}

bool matches(const GraphNode& node, const TargetFeature& target) {
  switch (target.kind) {
    case TargetKind::kOnset:
      return node.onset;
    case TargetKind::kKeyword:
      return !target.keyword.empty() && node.keyword == target.keyword;
    case TargetKind::kEnd:
      return true;
  }
  return false;
}

bool path_before(const PathCandidate& a, const PathCandidate& b) {
  if (a.total_cost() != b.total_cost()) return a.total_cost() < b.total_cost();
  if (a.nodes.back() != b.nodes.back()) return a.nodes.back() < b.nodes.back();
  return a.nodes < b.nodes;
}

std::vector<PathCandidate> expand_segment(const VideoMotionGraph& graph,
                                          std::span<const PathCandidate> starts,
                                          const TargetFeature& target, std::size_t target_length,
                                          const BeamConfig& config, std::size_t segment) {
  config.validate();
  if (starts.empty()) throw ValidationError("segment expansion needs at least one start path");
  if (target_length < 1) throw ValidationError("target segment length must be at least 1");
  for (const PathCandidate& s : starts) {
    if (s.nodes.empty() || s.nodes.back() >= graph.node_count()) {
      throw ValidationError("start path does not end on a graph node");
    }
  }

  const std::size_t min_len = config.min_length(target_length);
  const std::size_t max_depth =
      std::min(config.max_length(target_length), config.max_expansion_frames(target_length));
  if (min_len > max_depth) throw SegmentUnreachableError(segment);

  const auto k = static_cast<std::uint32_t>(config.blend_margin);
  const std::uint32_t run_cap = k > 0 ? 2 * k + 2 : 1;
  const bool closes_path = target.kind == TargetKind::kEnd;
  const std::size_t beam = config.beam_width;
  const std::size_t n = graph.node_count();

  // Depth 0 holds the starts in lexicographic order so that generation order
  // at every later depth is the lexicographic order of the partial paths.
  std::vector<std::size_t> order(starts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return starts[a].nodes < starts[b].nodes;
  });
  std::vector<std::vector<Live>> layers(1);
  for (std::size_t idx : order) {
    const PathCandidate& s = starts[idx];
    const auto run = static_cast<std::uint32_t>(std::min<std::size_t>(trailing_run(s.nodes), run_cap));
    layers[0].push_back({s.nodes.back(), idx, s.transition_cost, s.duration_cost, run});
  }

  std::vector<Accepted> pool;
  std::vector<Live> fresh;
  std::vector<std::size_t> bucket_start(n + 1);
  std::vector<std::size_t> by_node;
  std::vector<std::size_t> run_counts(run_cap + 1);

  // Largest of the beam_width cheapest accepted totals so far. A candidate
  // whose cost lower bound exceeds it can never make the returned beam.
  std::priority_queue<double> best_totals;
  auto bound = [&] {
    return best_totals.size() < beam ? std::numeric_limits<double>::infinity() : best_totals.top();
  };
  // Smallest duration cost still reachable from `depth`.
  auto duration_floor = [&](std::size_t depth) {
    if (depth <= target_length) return 0.0;
    return config.duration_weight *
           (static_cast<double>(depth) / static_cast<double>(target_length) - 1.0);
  };

  for (std::size_t depth = 1; depth <= max_depth; ++depth) {
    const std::vector<Live>& prev = layers.back();
    const double limit = bound() - duration_floor(depth);
    fresh.clear();
    for (std::size_t p = 0; p < prev.size(); ++p) {
      const Live& from = prev[p];
      if (depth > 1 && config.onset_free_interior && graph.node(from.node).onset) continue;
      for (const GraphEdge& e : graph.out_edges(from.node)) {
        if (from.transition + e.cost() + from.base_duration > limit) continue;
        std::uint32_t run;
        if (e.kind == EdgeKind::kSynthetic) {
          if (k > 0 && from.run < run_cap) continue;
          run = 1;
        } else {
          run = std::min(from.run + 1, run_cap);
        }
        fresh.push_back({e.dst, p, from.transition + e.cost(), from.base_duration, run});
      }
    }
    if (fresh.empty()) break;

    // Bucket by node, keeping generation (lexicographic) order inside a bucket.
    std::fill(bucket_start.begin(), bucket_start.end(), 0);
    for (const Live& c : fresh) ++bucket_start[c.node + 1];
    for (std::size_t i = 0; i < n; ++i) bucket_start[i + 1] += bucket_start[i];
    by_node.resize(fresh.size());
    {
      std::vector<std::size_t> cursor(bucket_start.begin(), bucket_start.end() - 1);
      for (std::size_t i = 0; i < fresh.size(); ++i) by_node[cursor[fresh[i].node]++] = i;
    }

    // A candidate is dropped once beam_width others at the same node are no
    // more expensive and have at least as long a natural run: any completion
    // of it is then beaten by beam_width completions of those.
    std::vector<char> keep(fresh.size(), 0);
    for (std::size_t v = 0; v < n; ++v) {
      auto first = by_node.begin() + static_cast<std::ptrdiff_t>(bucket_start[v]);
      auto last = by_node.begin() + static_cast<std::ptrdiff_t>(bucket_start[v + 1]);
      if (first == last) continue;
      std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
        const double ca = fresh[a].transition + fresh[a].base_duration;
        const double cb = fresh[b].transition + fresh[b].base_duration;
        return ca < cb;
      });
      std::fill(run_counts.begin(), run_counts.end(), 0);
      for (auto it = first; it != last; ++it) {
        const std::uint32_t r = fresh[*it].run;
        std::size_t dominators = 0;
        for (std::uint32_t q = r; q <= run_cap; ++q) dominators += run_counts[q];
        if (dominators < beam) keep[*it] = 1;
        ++run_counts[r];
      }
    }

    std::vector<Live> next;
    next.reserve(fresh.size());
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      if (keep[i]) next.push_back(fresh[i]);
    }
    layers.push_back(std::move(next));

    if (depth >= min_len) {
      const double ratio = static_cast<double>(depth) / static_cast<double>(target_length);
      const double duration = config.duration_weight * std::abs(1.0 - ratio);
      const std::vector<Live>& layer = layers.back();
      for (std::size_t i = 0; i < layer.size(); ++i) {
        const Live& c = layer[i];
        if (!matches(graph.node(c.node), target)) continue;
        if (closes_path && k > 0 && c.run < k + 1) continue;
        const double dur = c.base_duration + duration;
        const double total = c.transition + dur;
        pool.push_back({total, c.transition, dur, c.node, depth, i});
        if (best_totals.size() < beam) {
          best_totals.push(total);
        } else if (total < best_totals.top()) {
          best_totals.pop();
          best_totals.push(total);
        }
      }
    }
  }

  if (pool.empty()) throw SegmentUnreachableError(segment);

  auto materialize = [&](const Accepted& a) {
    std::vector<std::size_t> tail(a.depth);
    std::size_t idx = a.index;
    for (std::size_t d = a.depth; d >= 1; --d) {
      const Live& c = layers[d][idx];
      tail[d - 1] = c.node;
      idx = c.parent;
    }
    const PathCandidate& start = starts[layers[0][idx].parent];
    PathCandidate out;
    out.nodes = start.nodes;
    out.nodes.insert(out.nodes.end(), tail.begin(), tail.end());
    out.segment_boundaries = start.segment_boundaries;
    out.segment_boundaries.push_back(out.nodes.size() - 1);
    out.transition_cost = a.transition;
    out.duration_cost = a.duration;
    return out;
  };

  // Cost and last frame settle almost every comparison; equal pairs fall
  // back to the full node sequence.
  std::stable_sort(pool.begin(), pool.end(), [](const Accepted& a, const Accepted& b) {
    if (a.total != b.total) return a.total < b.total;
    return a.node < b.node;
  });
  std::vector<PathCandidate> out;
  std::size_t i = 0;
  while (i < pool.size() && out.size() < beam) {
    std::size_t j = i + 1;
    while (j < pool.size() && pool[j].total == pool[i].total && pool[j].node == pool[i].node) ++j;
    std::vector<PathCandidate> group;
    for (std::size_t g = i; g < j; ++g) group.push_back(materialize(pool[g]));
    std::sort(group.begin(), group.end(), path_before);
    for (auto& c : group) {
      if (out.size() == beam) break;
      out.push_back(std::move(c));
    }
    i = j;
  }
  return out;
}

std::vector<std::size_t> draw_start_frames(std::size_t node_count, const BeamConfig& config) {
  if (!config.start_frames.empty()) {
    for (std::size_t f : config.start_frames) {
      if (f >= node_count) {
        throw ValidationError("pinned start frame " + std::to_string(f) + " is not a graph node");
      }
    }
    return config.start_frames;
  }
  std::vector<std::size_t> pool(node_count);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  const std::size_t count = std::min(config.beam_width, node_count);
  std::mt19937_64 rng(config.seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded_draw(rng, node_count - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

SearchResult beam_search(const VideoMotionGraph& graph, const SegmentList& segments,
                         const BeamConfig& config) {
  config.validate();
  segments.validate();
  if (graph.node_count() == 0) throw ValidationError("cannot search an empty graph");

  std::vector<PathCandidate> beam;
  for (std::size_t f : draw_start_frames(graph.node_count(), config)) {
    PathCandidate start;
    start.nodes = {f};
    beam.push_back(std::move(start));
  }
  if (config.deduplicate) {
    std::sort(beam.begin(), beam.end(), path_before);
    beam.erase(std::unique(beam.begin(), beam.end()), beam.end());
  }

  SearchResult result;
  for (std::size_t s = 0; s < segments.segment_count(); ++s) {
    try {
      beam = expand_segment(graph, beam, segments.features[s], segments.length(s), config, s);
    } catch (const SegmentUnreachableError&) {
      if (s == 0) {
        result.unreachable_segment = 0;
        return result;
      }
      throw;
    }
  }
  std::sort(beam.begin(), beam.end(), path_before);
  if (config.deduplicate) {
    beam.erase(std::unique(beam.begin(), beam.end(),
                           [](const PathCandidate& a, const PathCandidate& b) {
                             return a.nodes == b.nodes;
                           }),
               beam.end());
  }
  if (beam.size() > config.beam_width) beam.resize(config.beam_width);
  result.paths = std::move(beam);
  return result;
}

PathCost audit_path(const VideoMotionGraph& graph, const PathCandidate& path,
                    const SegmentList& segments, double duration_weight) {
  if (path.nodes.empty()) throw AssemblyError("path has no nodes");
  if (path.segment_boundaries.size() != segments.segment_count() + 1 ||
      path.segment_boundaries.front() != 0 ||
      path.segment_boundaries.back() != path.nodes.size() - 1) {
    throw AssemblyError("path boundaries do not match the target segments");
  }
  PathCost cost;
  for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
    const GraphEdge* e = graph.find_edge(path.nodes[i], path.nodes[i + 1]);
    if (!e) {
      throw AssemblyError("step " + std::to_string(path.nodes[i]) + "->" +
                          std::to_string(path.nodes[i + 1]) + " is not a graph edge");
    }
    cost.transition += e->cost();
  }
  for (std::size_t s = 0; s < segments.segment_count(); ++s) {
    if (path.segment_boundaries[s + 1] <= path.segment_boundaries[s]) {
      throw AssemblyError("segment boundaries must increase");
    }
    const double achieved =
        static_cast<double>(path.segment_boundaries[s + 1] - path.segment_boundaries[s]);
    cost.duration +=
        duration_weight * std::abs(1.0 - achieved / static_cast<double>(segments.length(s)));
  }
  return cost;
}

ResampledRun resample_segment(std::span<const std::size_t> run, std::size_t target_length,
                              const BeamConfig& config) {
  if (run.empty() || target_length == 0) {
    throw ValidationError("cannot resample an empty run or onto zero frames");
  }
  if (run.size() < config.min_length(target_length) ||
      run.size() > config.max_length(target_length)) {
    throw ValidationError("run of " + std::to_string(run.size()) + " frames is outside the window for " +
                          std::to_string(target_length) + " target frames");
  }
  ResampledRun out;
  out.speed_factor = static_cast<double>(run.size()) / static_cast<double>(target_length);
  out.source_frames.resize(target_length);
  out.positions.resize(target_length);
  const double step = target_length > 1 ? static_cast<double>(run.size() - 1) /
                                              static_cast<double>(target_length - 1)
                                        : 0.0;
  for (std::size_t i = 0; i < target_length; ++i) {
    const double pos = i + 1 == target_length && target_length > 1
                           ? static_cast<double>(run.size() - 1)
                           : static_cast<double>(i) * step;
    out.positions[i] = pos;
    out.source_frames[i] = run[static_cast<std::size_t>(std::llround(pos))];
  }
  return out;
}

}  // namespace vmg
