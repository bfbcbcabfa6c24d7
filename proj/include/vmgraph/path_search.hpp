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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vmgraph/audio_features.hpp"
#include "vmgraph/motion_graph.hpp"

namespace vmg {

struct BeamConfig {
  std::size_t beam_width = 20;
  double window_low = 0.9;  // accepted L'/L_s band
  double window_high = 1.1;
  double duration_weight = 1.0;
  int expansion_slack = 8;                // cap = ceil(window_high * L_s) + slack
  std::uint64_t seed = 0;
  std::vector<std::size_t> start_frames;  // pinned starts; random when empty
  bool onset_free_interior = true;        // interior nodes of a segment carry no onset
  int blend_margin = 0;                   // k > 0 keeps synthetic edges blendable
  bool deduplicate = false;               // drop paths with identical node sequences

  /// Throws ValidationError when the window or widths are out of range.
  void validate() const;

  /// Shortest and longest accepted lengths for a target of `target_length`
  /// frames. Bounds are inclusive: ceil(low * L) and floor(high * L), with a
  /// 1e-9 guard against representation error, and never below one frame.
  std::size_t min_length(std::size_t target_length) const;
  std::size_t max_length(std::size_t target_length) const;
  std::size_t max_expansion_frames(std::size_t target_length) const;
};

/// A walk through the graph. `segment_boundaries[0]` is 0 and entry s + 1
/// indexes the node closing segment s, so segment s covers the nodes
/// (boundaries[s], boundaries[s + 1]].
struct PathCandidate {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> segment_boundaries{0};
  double transition_cost = 0.0;
  double duration_cost = 0.0;

  double total_cost() const noexcept { return transition_cost + duration_cost; }
  std::size_t segment_count() const noexcept { return segment_boundaries.size() - 1; }
  /// Achieved lengths L'_s, one per completed segment.
  std::vector<std::size_t> achieved_lengths() const;

  friend bool operator==(const PathCandidate&, const PathCandidate&) = default;
};

struct SearchResult {
  std::vector<PathCandidate> paths;  // ascending total cost
  /// Set when the first segment could not be closed from any start.
  std::optional<std::size_t> unreachable_segment;

  bool empty() const noexcept { return paths.empty(); }
  const PathCandidate& best() const { return paths.front(); }
};

/// True when a node closes a segment with this target feature.
bool matches(const GraphNode& node, const TargetFeature& target);

/// Final ordering of candidates: total cost, then last frame, then the
/// lexicographic node sequence.
bool path_before(const PathCandidate& a, const PathCandidate& b);

/// Extends every start path by one segment. Returned candidates end on a
/// node matching `target`, have an accepted length, and carry the added
/// transition and duration costs; at most `beam_width` of them are returned
/// in path_before order. Throws SegmentUnreachableError naming `segment`
/// when nothing qualifies.
std::vector<PathCandidate> expand_segment(const VideoMotionGraph& graph,
                                          std::span<const PathCandidate> starts,
                                          const TargetFeature& target, std::size_t target_length,
                                          const BeamConfig& config, std::size_t segment = 0);

/// Seeds beam_width random starts (or the pinned start frames) and runs
/// expand_segment over every segment, keeping the best beam_width paths
/// after each. An unreachable first segment yields an empty result with
/// `unreachable_segment` set; later failures throw SegmentUnreachableError.
SearchResult beam_search(const VideoMotionGraph& graph, const SegmentList& segments,
                         const BeamConfig& config = {});

/// Start frames drawn for `config` on a graph of `node_count` nodes.
std::vector<std::size_t> draw_start_frames(std::size_t node_count, const BeamConfig& config);

struct PathCost {
  double transition = 0.0;
  double duration = 0.0;
  double total() const noexcept { return transition + duration; }
};

/// Recomputes costs of a path from the graph alone. Throws AssemblyError if
/// a step is not a graph edge or the boundaries do not fit the segments.
PathCost audit_path(const VideoMotionGraph& graph, const PathCandidate& path,
                    const SegmentList& segments, double duration_weight = 1.0);

struct ResampledRun {
  std::vector<std::size_t> source_frames;  // nearest source frame per output slot
  std::vector<double> positions;           // fractional index into the run
  double speed_factor = 1.0;               // L' / L_s
};

/// Uniformly maps a run of L' frames onto `target_length` output slots; the
/// first slot shows run[0] and the last shows run[L' - 1]. Throws
/// ValidationError when L' / L_s is outside the configured window.
ResampledRun resample_segment(std::span<const std::size_t> run, std::size_t target_length,
                              const BeamConfig& config = {});

}  // namespace vmg
