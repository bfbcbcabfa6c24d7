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
#include <vector>

#include "vmgraph/audio_features.hpp"
#include "vmgraph/formats.hpp"
#include "vmgraph/wav.hpp"

namespace vmg {

/// Synthetic upper-body puppet used for demos and end-to-end tests.
struct FixtureConfig {
  std::size_t reference_frames = 2000;
  std::size_t target_frames = 450;
  double fps = 30.0;
  int sample_rate = 16000;
  std::uint64_t seed = 1;
};

Skeleton puppet_skeleton();
CameraModel puppet_camera();

struct ReferenceFixture {
  PoseTrack track;
  AudioClip audio;
  std::vector<TranscriptWord> transcript;
  std::vector<std::size_t> stroke_frames;  // frames carrying an audible click
};

/// Idle sway interleaved with beat strokes, a "hello" wave, a "here" point
/// and an open-arms "more". Every beat stroke lands on a click.
ReferenceFixture make_reference(const FixtureConfig& config = {});

struct TargetFixture {
  AudioClip audio;
  std::vector<TranscriptWord> transcript;
  std::vector<std::size_t> click_frames;
};

/// Clicks and keywords only; every keyword also occurs in the reference.
TargetFixture make_target(const FixtureConfig& config = {});

/// Decaying tone bursts at `clicks_per_second`, the first at t = 0.5 / rate.
AudioClip metronome(double clicks_per_second, double duration, int sample_rate = 16000,
                    double amplitude = 0.5);

/// Adds one click starting at `time` seconds.
void add_click(AudioClip& clip, double time, double amplitude = 0.5);

/// Writes reference_pose.json, reference.wav, reference_transcript.json,
/// target.wav and target_transcript.json into `dir`.
void write_fixture(const std::filesystem::path& dir, const FixtureConfig& config = {});

}  // namespace vmg
