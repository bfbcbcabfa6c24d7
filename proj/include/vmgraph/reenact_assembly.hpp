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
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vmgraph/audio_features.hpp"
#include "vmgraph/motion_graph.hpp"
#include "vmgraph/path_search.hpp"
#include "vmgraph/pose_model.hpp"
#include "vmgraph/silhouette.hpp"

namespace vmg {

struct BlendStep {
  double alpha = 0.0;
  std::size_t src_frame = 0;  // from [m - k, m]
  std::size_t dst_frame = 0;  // from [n, n + k]
  PoseFrame pose;             // (1 - alpha) * src + alpha * dst
};

/// Replaces the neighborhood of a synthetic transition m -> n with 2k + 1
/// blended output slots. Step s pairs source frame m - k + min(s, k) with
/// destination frame n + max(s - k, 0) at alpha = s / 2k, so the first step
/// is frame m - k and the last is frame n + k.
struct BlendSchedule {
  std::size_t from_frame = 0;  // m
  std::size_t to_frame = 0;    // n
  int k = 4;
  std::size_t output_start = 0;
  std::vector<BlendStep> steps;

  std::size_t slot_count() const noexcept { return steps.size(); }
  /// Steps with alpha > 0, i.e. frames the renderer has to synthesize
  /// towards the destination clip: 2k.
  std::size_t blended_frame_count() const;
  std::pair<std::size_t, std::size_t> src_window() const { return {from_frame - k, from_frame}; }
  std::pair<std::size_t, std::size_t> dst_window() const { return {to_frame, to_frame + k}; }
};

/// Builds the schedule for transition m -> n. Throws AssemblyError if either
/// window leaves the sequence.
BlendSchedule make_blend_schedule(const MotionSequence& sequence, std::size_t from_frame,
                                  std::size_t to_frame, int k, std::size_t output_start = 0);

/// Consecutive output slots played from source frames.
struct RunEntry {
  std::size_t output_start = 0;
  std::vector<std::size_t> source_frames;  // nearest source frame per slot
  std::vector<double> source_positions;    // fractional source frame per slot
  double speed_factor = 1.0;

  std::size_t slot_count() const noexcept { return source_frames.size(); }
};

using EdlEntry = std::variant<RunEntry, BlendSchedule>;

struct EditDecisionList {
  double fps = 30.0;
  std::size_t total_frames = 0;
  int blend_k = 4;
  std::string graph_sha256;
  std::uint64_t seed = 0;
  std::vector<EdlEntry> entries;
  std::vector<std::pair<std::size_t, std::size_t>> speech_ranges;  // half-open output slots

  std::size_t transition_count() const;
};

struct AssemblyOptions {
  int blend_k = 4;
  BeamConfig window;  // duration window used to resample segments
  std::string graph_sha256;
  std::uint64_t seed = 0;
  std::vector<bool> speech;  // per target frame; may be empty
};

/// Resamples every segment to its target length and wraps every synthetic
/// edge of the path in a blend schedule. Throws AssemblyError when a run
/// next to a transition is shorter than k + 1 frames or two blend windows
/// would overlap.
EditDecisionList assemble_edl(const PathCandidate& path, const VideoMotionGraph& graph,
                              const SegmentList& segments, const MotionSequence& sequence,
                              const AssemblyOptions& options = {});

/// The pose shown at every output slot.
std::vector<PoseFrame> edl_poses(const EditDecisionList& edl, const MotionSequence& sequence);

struct Image {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;

  friend bool operator==(const Image&, const Image&) = default;
};

struct RenderConfig {
  CameraModel camera;
  int stroke_radius = 2;  // pixels
  std::filesystem::path output_dir;
};

/// Draws the skeleton of one pose as thick bone strokes with joint dots.
Image render_pose(const Skeleton& skeleton, const PoseFrame& pose, const RenderConfig& config);

/// One image per output slot of the EDL.
std::vector<Image> render_preview(const EditDecisionList& edl, const Skeleton& skeleton,
                                  const MotionSequence& sequence, const RenderConfig& config);

/// Binary portable pixmap (P6).
void write_ppm(const Image& image, const std::filesystem::path& path);
std::vector<unsigned char> encode_ppm(const Image& image);

}  // namespace vmg
