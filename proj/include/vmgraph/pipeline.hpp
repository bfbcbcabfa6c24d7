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
#include <optional>
#include <span>
#include <vector>

#include "vmgraph/audio_features.hpp"
#include "vmgraph/formats.hpp"
#include "vmgraph/motion_graph.hpp"
#include "vmgraph/wav.hpp"

namespace vmg {

/// Onsets, keyword labels and speech mask of one clip. The track has
/// `frames` entries when given, otherwise round(duration * fps).
AudioFeatureTrack analyze_audio(const AudioClip& clip, std::span<const TranscriptWord> transcript,
                                const KeywordDictionary& dictionary, double fps,
                                const OnsetConfig& onsets = {},
                                std::optional<std::size_t> frames = std::nullopt);

/// Silhouette of every frame of a pose track.
std::vector<SilhouetteMask> rasterize_track(const PoseTrack& track,
                                            std::span<const JointState> states);

/// Joint states, silhouettes, thresholds and edges of a reference
/// performance. Throws StructuralError when the feature track length differs
/// from the pose track.
VideoMotionGraph build_reference_graph(const PoseTrack& track, const AudioFeatureTrack& features,
                                       int offset_l = 4, const GraphBuildOptions& options = {});

}  // namespace vmg
