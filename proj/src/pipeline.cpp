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

#include "vmgraph/pipeline.hpp"

#include <cmath>
#include <string>

#include "parallel.hpp"
#include "vmgraph/error.hpp"

namespace vmg {

AudioFeatureTrack analyze_audio(const AudioClip& clip, std::span<const TranscriptWord> transcript,
                                const KeywordDictionary& dictionary, double fps,
                                const OnsetConfig& onsets, std::optional<std::size_t> frames) {
  OnsetTrack track = detect_onsets(clip.samples, clip.sample_rate, fps, onsets);
  if (frames) track.flags.resize(*frames, false);
  const std::size_t n = track.flags.size();
  return make_feature_track(track, match_keywords(transcript, dictionary, fps, n),
                            speech_frames(transcript, fps, n));
}

std::vector<SilhouetteMask> rasterize_track(const PoseTrack& track,
                                            std::span<const JointState> states) {
  track.camera.validate();
  std::vector<SilhouetteMask> masks(states.size());
  detail::parallel_blocks(states.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      masks[i] = rasterize_silhouette(track.skeleton, states[i].positions, track.camera);
    }
  });
  return masks;
}

VideoMotionGraph build_reference_graph(const PoseTrack& track, const AudioFeatureTrack& features,
                                       int offset_l, const GraphBuildOptions& options) {
  if (features.size() != track.sequence.size()) {
    throw StructuralError("audio features cover " + std::to_string(features.size()) +
                          " frames but the pose track has " +
                          std::to_string(track.sequence.size()));
  }
  const std::vector<JointState> states = compute_joint_states(track.skeleton, track.sequence);
  const std::vector<SilhouetteMask> masks = rasterize_track(track, states);
  const Thresholds thresholds =
      compute_thresholds(states, masks, offset_l, options.velocity_weight);
  return build_graph(states, masks, features.frames, thresholds, options);
}

}  // namespace vmg
