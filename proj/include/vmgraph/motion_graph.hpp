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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vmgraph/audio_features.hpp"
#include "vmgraph/pose_model.hpp"
#include "vmgraph/silhouette.hpp"

namespace vmg {

struct GraphNode {
  std::size_t frame_index = 0;
  bool onset = false;
  std::string keyword;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

enum class EdgeKind : unsigned char { kNatural = 0, kSynthetic = 1 };

struct GraphEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  EdgeKind kind = EdgeKind::kNatural;
  double d_feat = 0.0;
  double d_img = 0.0;

  double cost() const noexcept { return d_feat + d_img; }
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct Thresholds {
  double tau_feat = 0.0;
  double tau_img = 0.0;
  int offset_l = 4;

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct GraphBuildOptions {
  double velocity_weight = 1.0;
  int min_jump = 2;  // synthetic edges need |m - n| >= min_jump

  friend bool operator==(const GraphBuildOptions&, const GraphBuildOptions&) = default;
};

/// Directed graph over reference frames. Edges are sorted by (src, dst) and
/// indexed by source for constant-time access to outgoing transitions.
class VideoMotionGraph {
 public:
  VideoMotionGraph() = default;

  /// Validates the natural chain, edge uniqueness, and that every synthetic
  /// edge passes both thresholds. Throws StructuralError on violation.
  VideoMotionGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges, Thresholds thresholds,
                   GraphBuildOptions options = {});

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t synthetic_edge_count() const noexcept;

  const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  const GraphNode& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<GraphEdge>& edges() const noexcept { return edges_; }
  std::span<const GraphEdge> out_edges(std::size_t src) const {
    return {edges_.data() + offsets_[src], edges_.data() + offsets_[src + 1]};
  }
  /// nullptr when there is no src -> dst edge.
  const GraphEdge* find_edge(std::size_t src, std::size_t dst) const;

  const Thresholds& thresholds() const noexcept { return thresholds_; }
  const GraphBuildOptions& options() const noexcept { return options_; }

  friend bool operator==(const VideoMotionGraph& a, const VideoMotionGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ && a.thresholds_ == b.thresholds_ &&
           a.options_ == b.options_;
  }

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::size_t> offsets_{0};
  Thresholds thresholds_;
  GraphBuildOptions options_;
};

/// Means of d_feat(m, m + l) and d_img(m, m + l) over every valid m.
Thresholds compute_thresholds(std::span<const JointState> states,
                              std::span<const SilhouetteMask> masks, int offset_l = 4,
                              double velocity_weight = 1.0);

/// Natural chain plus every ordered pair (m, n) with |m - n| >= min_jump
/// whose distances pass both thresholds.
VideoMotionGraph build_graph(std::span<const JointState> states,
                             std::span<const SilhouetteMask> masks,
                             std::span<const FrameFeature> features, const Thresholds& thresholds,
                             const GraphBuildOptions& options = {});

/// Versioned little-endian binary container; doubles are stored bit-exact.
std::vector<unsigned char> save_graph(const VideoMotionGraph& graph);

/// Throws ParseError carrying the byte offset of the first malformed field.
VideoMotionGraph load_graph(std::span<const unsigned char> bytes);

void save_graph_file(const VideoMotionGraph& graph, const std::filesystem::path& path);
VideoMotionGraph load_graph_file(const std::filesystem::path& path);

}  // namespace vmg
