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

#include "vmgraph/motion_graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "parallel.hpp"
#include "vmgraph/error.hpp"

namespace vmg {
namespace {

constexpr char kMagic[8] = {'V', 'M', 'G', 'R', 'A', 'P', 'H', '\0'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kEndMarker = 0x444e4547;  // "GEND"

bool edge_order(const GraphEdge& a, const GraphEdge& b) {
  return a.src != b.src ? a.src < b.src : a.dst < b.dst;
}

void check_lengths(std::size_t states, std::size_t masks) {
  if (states != masks) {
    throw StructuralError("got " + std::to_string(states) + " joint states but " +
                          std::to_string(masks) + " masks");
  }
}

class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes_.push_back(static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
    }
  }
  void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void put_raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<unsigned char> take() { return std::move(bytes_); }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  double get_f64(const char* what) { return std::bit_cast<double>(get<std::uint64_t>(what)); }
  std::string get_string(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(std::string("truncated graph stream while reading ") + what, pos_);
    }
  }

  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

VideoMotionGraph::VideoMotionGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges,
                                   Thresholds thresholds, GraphBuildOptions options)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      thresholds_(thresholds),
      options_(options) {
  const std::size_t n = nodes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes_[i].frame_index != i) {
      throw StructuralError("node " + std::to_string(i) + " carries frame index " +
                            std::to_string(nodes_[i].frame_index));
    }
  }
  if (!std::is_sorted(edges_.begin(), edges_.end(), edge_order)) {
    std::sort(edges_.begin(), edges_.end(), edge_order);
  }
  std::size_t natural = 0;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const GraphEdge& edge = edges_[e];
    const std::string where = "edge " + std::to_string(edge.src) + "->" + std::to_string(edge.dst);
    if (edge.src >= n || edge.dst >= n) throw StructuralError(where + " references a missing node");
    if (edge.src == edge.dst) throw StructuralError(where + " is a self edge");
    if (e > 0 && edges_[e - 1].src == edge.src && edges_[e - 1].dst == edge.dst) {
      throw StructuralError(where + " is duplicated");
    }
    if (edge.kind == EdgeKind::kNatural) {
      if (edge.dst != edge.src + 1 || edge.d_feat != 0.0 || edge.d_img != 0.0) {
        throw StructuralError(where + " is not a zero-cost consecutive natural edge");
      }
      ++natural;
    } else {
      if (edge.dst == edge.src + 1) throw StructuralError(where + " duplicates a natural edge");
      const std::size_t gap = edge.dst > edge.src ? edge.dst - edge.src : edge.src - edge.dst;
      if (gap < static_cast<std::size_t>(std::max(options_.min_jump, 1))) {
        throw StructuralError(where + " jumps fewer than " + std::to_string(options_.min_jump) +
                              " frames");
      }
      if (!(edge.d_feat >= 0.0) || !(edge.d_img >= 0.0) || edge.d_img > 1.0) {
        throw StructuralError(where + " has distances outside their ranges");
      }
      if (edge.d_feat > thresholds_.tau_feat || edge.d_img > thresholds_.tau_img) {
        throw StructuralError(where + " exceeds the transition thresholds");
      }
    }
  }
  if (n > 0 && natural != n - 1) {
    throw StructuralError("natural edges do not form a single chain over all frames");
  }
  offsets_.assign(n + 1, 0);
  for (const GraphEdge& edge : edges_) ++offsets_[edge.src + 1];
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
}

std::size_t VideoMotionGraph::synthetic_edge_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [](const GraphEdge& e) {
    return e.kind == EdgeKind::kSynthetic;
  }));
}

const GraphEdge* VideoMotionGraph::find_edge(std::size_t src, std::size_t dst) const {
  if (src >= nodes_.size()) return nullptr;
  auto out = out_edges(src);
  auto it = std::lower_bound(out.begin(), out.end(), dst,
                             [](const GraphEdge& e, std::size_t d) { return e.dst < d; });
  return (it != out.end() && it->dst == dst) ? &*it : nullptr;
}

Thresholds compute_thresholds(std::span<const JointState> states,
                              std::span<const SilhouetteMask> masks, int offset_l,
                              double velocity_weight) {
  check_lengths(states.size(), masks.size());
  if (offset_l < 1) {
    throw ValidationError("threshold offset must be at least 1");
  }
  const auto l = static_cast<std::size_t>(offset_l);
  if (states.size() <= l) {
    throw ValidationError("sequence of " + std::to_string(states.size()) +
                          " frames is too short for threshold offset " + std::to_string(l));
  }
  const std::size_t pairs = states.size() - l;
  double feat = 0.0;
  double img = 0.0;
  for (std::size_t m = 0; m < pairs; ++m) {
    feat += pose_distance(states[m], states[m + l], velocity_weight);
    img += image_distance(masks[m], masks[m + l]);
  }
  return {feat / static_cast<double>(pairs), img / static_cast<double>(pairs), offset_l};
}

VideoMotionGraph build_graph(std::span<const JointState> states,
                             std::span<const SilhouetteMask> masks,
                             std::span<const FrameFeature> features, const Thresholds& thresholds,
                             const GraphBuildOptions& options) {
  check_lengths(states.size(), masks.size());
  if (features.size() != states.size()) {
    throw StructuralError("got " + std::to_string(features.size()) + " audio features for " +
                          std::to_string(states.size()) + " frames");
  }
  if (options.min_jump < 1) {
    throw ValidationError("minimum jump must be at least 1");
  }
  const std::size_t n = states.size();
  std::vector<GraphNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = {i, features[i].onset, features[i].keyword};
  }

  const auto min_jump = static_cast<std::size_t>(options.min_jump);
  std::vector<std::vector<GraphEdge>> blocks(detail::worker_count(n));
  detail::parallel_blocks(n, [&](std::size_t begin, std::size_t end, std::size_t block) {
    std::vector<GraphEdge>& out = blocks[block];
    for (std::size_t m = begin; m < end; ++m) {
      for (std::size_t d = 0; d < n; ++d) {
        if (d == m + 1) {
          out.push_back({m, d, EdgeKind::kNatural, 0.0, 0.0});
          continue;
        }
        const std::size_t gap = d > m ? d - m : m - d;
        if (gap < min_jump || d == m) continue;
        const double feat = pose_distance(states[m], states[d], options.velocity_weight);
        if (!(feat <= thresholds.tau_feat)) continue;
        const double img = image_distance(masks[m], masks[d]);
        if (!(img <= thresholds.tau_img)) continue;
        out.push_back({m, d, EdgeKind::kSynthetic, feat, img});
      }
    }
  }, blocks.size());

  std::vector<GraphEdge> edges;
  for (auto& block : blocks) {
    edges.insert(edges.end(), std::make_move_iterator(block.begin()),
                 std::make_move_iterator(block.end()));
  }
  return VideoMotionGraph(std::move(nodes), std::move(edges), thresholds, options);
}

std::vector<unsigned char> save_graph(const VideoMotionGraph& graph) {
  Writer w;
  w.put_raw(kMagic, sizeof(kMagic));
  w.put(kFormatVersion);
  w.put_f64(graph.thresholds().tau_feat);
  w.put_f64(graph.thresholds().tau_img);
  w.put(static_cast<std::int32_t>(graph.thresholds().offset_l));
  w.put(static_cast<std::int32_t>(graph.options().min_jump));
  w.put_f64(graph.options().velocity_weight);
  w.put(static_cast<std::uint64_t>(graph.node_count()));
  for (const GraphNode& node : graph.nodes()) {
    w.put(static_cast<std::uint8_t>(node.onset ? 1 : 0));
    w.put(static_cast<std::uint32_t>(node.keyword.size()));
    w.put_raw(node.keyword.data(), node.keyword.size());
  }
  w.put(static_cast<std::uint64_t>(graph.edge_count()));
  for (const GraphEdge& edge : graph.edges()) {
    w.put(static_cast<std::uint32_t>(edge.src));
    w.put(static_cast<std::uint32_t>(edge.dst));
    w.put(static_cast<std::uint8_t>(edge.kind));
    w.put_f64(edge.d_feat);
    w.put_f64(edge.d_img);
  }
  w.put(kEndMarker);
  return w.take();
}

VideoMotionGraph load_graph(std::span<const unsigned char> bytes) {
  Reader r(bytes);
  if (r.get_string(sizeof(kMagic), "magic") != std::string(kMagic, sizeof(kMagic))) {
    throw ParseError("not a motion graph stream", 0);
  }
  const std::size_t version_at = r.pos();
  if (r.get<std::uint32_t>("version") != kFormatVersion) {
    throw ParseError("unsupported graph format version", version_at);
  }
  Thresholds thresholds;
  GraphBuildOptions options;
  thresholds.tau_feat = r.get_f64("tau_feat");
  thresholds.tau_img = r.get_f64("tau_img");
  thresholds.offset_l = r.get<std::int32_t>("offset_l");
  options.min_jump = r.get<std::int32_t>("min_jump");
  options.velocity_weight = r.get_f64("velocity_weight");

  const std::size_t count_at = r.pos();
  const auto node_count = r.get<std::uint64_t>("node count");
  // Every node takes at least five bytes.
  if (node_count > r.remaining() / 5) {
    throw ParseError("node count exceeds stream size", count_at);
  }
  std::vector<GraphNode> nodes(static_cast<std::size_t>(node_count));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::size_t at = r.pos();
    const auto onset = r.get<std::uint8_t>("onset flag");
    if (onset > 1) throw ParseError("invalid onset flag", at);
    const auto len = r.get<std::uint32_t>("keyword length");
    nodes[i] = {i, onset == 1, r.get_string(len, "keyword")};
  }

  const std::size_t edges_at = r.pos();
  const auto edge_count = r.get<std::uint64_t>("edge count");
  constexpr std::size_t kEdgeBytes = 4 + 4 + 1 + 8 + 8;
  if (edge_count > r.remaining() / kEdgeBytes) {
    throw ParseError("edge count exceeds stream size", edges_at);
  }
  std::vector<GraphEdge> edges(static_cast<std::size_t>(edge_count));
  for (GraphEdge& edge : edges) {
    const std::size_t at = r.pos();
    edge.src = r.get<std::uint32_t>("edge source");
    edge.dst = r.get<std::uint32_t>("edge target");
    const auto kind = r.get<std::uint8_t>("edge kind");
    if (kind > 1) throw ParseError("invalid edge kind", at + 8);
    edge.kind = static_cast<EdgeKind>(kind);
    edge.d_feat = r.get_f64("d_feat");
    edge.d_img = r.get_f64("d_img");
    if (edge.src >= nodes.size() || edge.dst >= nodes.size()) {
      throw ParseError("edge references a missing node", at);
    }
  }
  const std::size_t end_at = r.pos();
  if (r.get<std::uint32_t>("end marker") != kEndMarker || r.remaining() != 0) {
    throw ParseError("missing end marker or trailing bytes", end_at);
  }
  try {
    return VideoMotionGraph(std::move(nodes), std::move(edges), thresholds, options);
  } catch (const StructuralError& e) {
    throw ParseError(std::string("inconsistent graph: ") + e.what(), edges_at);
  }
}

void save_graph_file(const VideoMotionGraph& graph, const std::filesystem::path& path) {
  const auto bytes = save_graph(graph);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

VideoMotionGraph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return load_graph(bytes);
}

}  // namespace vmg
