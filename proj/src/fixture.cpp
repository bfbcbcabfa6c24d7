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

#include "vmgraph/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "vmgraph/error.hpp"

namespace vmg {
namespace {

enum JointId : std::size_t {
  kPelvis, kSpine, kChest, kNeck, kHead,
  kLShoulder, kLElbow, kLWrist, kLHand,
  kRShoulder, kRElbow, kRWrist, kRHand,
  kLHip, kRHip,
};

enum class Gesture { kBeat, kWave, kPoint, kOpen };

struct Event {
  Gesture kind;
  std::size_t start;
  std::size_t length;
  double amplitude;
  bool both_arms;
};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

// Rises over `ramp` frames, holds, and falls over the last `ramp` frames.
double envelope(double u, double length, double ramp) {
  return smoothstep(u / ramp) * smoothstep((length - u) / ramp);
}

std::size_t length_of(Gesture g) {
  switch (g) {
    case Gesture::kBeat:
      return 24;
    case Gesture::kWave:
      return 50;
    case Gesture::kPoint:
    case Gesture::kOpen:
      break;
  }
  return 40;
}

// Frame of the stroke inside a beat.
constexpr std::size_t kStrokeOffset = 13;

// Arm lift of a beat: up over 12 frames, a fast stroke below rest, recovery.
double beat_curve(double u) {
  if (u < 12.0) return smoothstep(u / 12.0);
  if (u < 15.0) return 1.0 - 1.3 * smoothstep((u - 12.0) / 3.0);
  return -0.3 * (1.0 - smoothstep((u - 15.0) / 9.0));
}

void add_idle(PoseFrame& pose, double t) {
  auto wave = [t](double period, double phase) { return std::sin(kTwoPi * t / period + phase); };
  auto& r = pose.joint_rotations;
  pose.root_translation += Vec3(0.02 * wave(7.1, 0.0), 0.005 * wave(3.9, 1.0), 0.0);
  r[kSpine] += Vec3(0.03 * wave(5.3, 0.4), 0.05 * wave(8.9, 2.0), 0.04 * wave(3.7, 0.3));
  r[kNeck] += Vec3(0.05 * wave(2.9, 1.0), 0.0, 0.02 * wave(4.1, 0.5));
  r[kHead] += Vec3(0.0, 0.08 * wave(6.1, 0.0), 0.0);
  r[kLShoulder] += Vec3(0.04 * wave(5.9, 1.3), 0.0, 0.12 + 0.05 * wave(4.3, 0.0));
  r[kRShoulder] += Vec3(0.04 * wave(6.7, 0.2), 0.0, -0.12 - 0.05 * wave(4.7, 2.0));
  r[kLElbow] += Vec3(-0.3 + 0.1 * wave(3.1, 0.0), 0.0, 0.0);
  r[kRElbow] += Vec3(-0.3 + 0.1 * wave(3.3, 1.0), 0.0, 0.0);
}

void add_event(PoseFrame& pose, const Event& e, double u) {
  auto& r = pose.joint_rotations;
  const double len = static_cast<double>(e.length);
  switch (e.kind) {
    case Gesture::kBeat: {
      const double a = e.amplitude * beat_curve(u);
      r[kRShoulder] += Vec3(-0.3 * a, 0.0, -0.5 * a);
      r[kRElbow] += Vec3(-1.2 * a, 0.0, 0.0);
      r[kRWrist] += Vec3(-0.4 * a, 0.0, 0.0);
      if (e.both_arms) {
        r[kLShoulder] += Vec3(-0.3 * a, 0.0, 0.5 * a);
        r[kLElbow] += Vec3(-1.2 * a, 0.0, 0.0);
      }
      break;
    }
    case Gesture::kWave: {
      const double a = envelope(u, len, 12.0);
      r[kRShoulder] += Vec3(0.0, 0.0, -2.3 * a);
      r[kRElbow] += Vec3(0.0, 0.0, a * (-0.6 + 0.45 * std::sin(kTwoPi * u / 10.0)));
      break;
    }
    case Gesture::kPoint: {
      const double a = e.amplitude * envelope(u, len, 10.0);
      r[kLShoulder] += Vec3(-1.3 * a, 0.0, 0.2 * a);
      r[kLElbow] += Vec3(0.25 * a, 0.0, 0.0);
      r[kSpine] += Vec3(0.0, 0.15 * a, 0.0);
      break;
    }
    case Gesture::kOpen: {
      const double a = e.amplitude * envelope(u, len, 10.0);
      r[kLShoulder] += Vec3(-0.4 * a, 0.0, 0.9 * a);
      r[kRShoulder] += Vec3(-0.4 * a, 0.0, -0.9 * a);
      r[kLElbow] += Vec3(-0.5 * a, 0.0, 0.0);
      r[kRElbow] += Vec3(-0.5 * a, 0.0, 0.0);
      break;
    }
  }
}

const char* keyword_of(Gesture g) {
  switch (g) {
    case Gesture::kWave:
      return "hello";
    case Gesture::kPoint:
      return "here";
    case Gesture::kOpen:
      return "more";
    case Gesture::kBeat:
      break;
  }
  return nullptr;
}

std::vector<Event> schedule(std::size_t frames, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> gap(2, 16);
  std::uniform_real_distribution<double> amp(0.9, 1.1);
  std::bernoulli_distribution both(0.15);
  std::vector<Event> events;
  std::size_t f = 20;
  for (std::size_t i = 0;; ++i) {
    Gesture kind = Gesture::kBeat;
    if (i % 8 == 2) kind = Gesture::kWave;
    if (i % 8 == 5) kind = Gesture::kPoint;
    if (i % 8 == 7) kind = Gesture::kOpen;
    const std::size_t len = length_of(kind);
    const double a = amp(rng);
    const bool b = both(rng);
    if (f + len + 10 > frames) break;
    events.push_back({kind, f, len, a, b});
    f += len + gap(rng);
  }
  return events;
}

std::string filler(std::size_t i) {
  static const char* kWords[] = {"so", "and", "the", "we", "it", "was", "just", "then"};
  return kWords[i % std::size(kWords)];
}

}  // namespace

Skeleton puppet_skeleton() {
  auto joint = [](const char* name, std::optional<std::size_t> parent, Vec3 offset, double radius) {
    return Joint{name, parent, offset, radius};
  };
  return Skeleton({
      joint("pelvis", std::nullopt, Vec3(0.0, 0.0, 0.0), 0.12),
      joint("spine", kPelvis, Vec3(0.0, 0.2, 0.0), 0.11),
      joint("chest", kSpine, Vec3(0.0, 0.25, 0.0), 0.13),
      joint("neck", kChest, Vec3(0.0, 0.15, 0.0), 0.05),
      joint("head", kNeck, Vec3(0.0, 0.15, 0.0), 0.1),
      joint("l_shoulder", kChest, Vec3(0.18, 0.08, 0.0), 0.05),
      joint("l_elbow", kLShoulder, Vec3(0.0, -0.28, 0.0), 0.045),
      joint("l_wrist", kLElbow, Vec3(0.0, -0.25, 0.0), 0.04),
      joint("l_hand", kLWrist, Vec3(0.0, -0.08, 0.0), 0.035),
      joint("r_shoulder", kChest, Vec3(-0.18, 0.08, 0.0), 0.05),
      joint("r_elbow", kRShoulder, Vec3(0.0, -0.28, 0.0), 0.045),
      joint("r_wrist", kRElbow, Vec3(0.0, -0.25, 0.0), 0.04),
      joint("r_hand", kRWrist, Vec3(0.0, -0.08, 0.0), 0.035),
      joint("l_hip", kPelvis, Vec3(0.1, -0.08, 0.0), 0.08),
      joint("r_hip", kPelvis, Vec3(-0.1, -0.08, 0.0), 0.08),
  });
}

CameraModel puppet_camera() {
  CameraModel cam;
  cam.focal_length = 220.0;
  cam.rotation = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  cam.translation = Vec3(0.0, 1.3, 3.2);
  return cam;
}

void add_click(AudioClip& clip, double time, double amplitude) {
  const auto sr = static_cast<double>(clip.sample_rate);
  const auto start = static_cast<std::size_t>(std::llround(time * sr));
  const auto len = static_cast<std::size_t>(0.04 * sr);
  for (std::size_t i = 0; i < len && start + i < clip.samples.size(); ++i) {
    const double t = static_cast<double>(i) / sr;
    clip.samples[start + i] += amplitude * std::exp(-t / 0.008) * std::sin(kTwoPi * 1500.0 * t);
  }
}

AudioClip metronome(double clicks_per_second, double duration, int sample_rate,
                    double amplitude) {
  if (!(clicks_per_second > 0.0) || !(duration > 0.0) || sample_rate <= 0) {
    throw ValidationError("metronome needs a positive rate, duration and sample rate");
  }
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.assign(static_cast<std::size_t>(std::llround(duration * sample_rate)), 0.0);
  for (std::size_t i = 0;; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / clicks_per_second;
    if (t >= duration) break;
    add_click(clip, t, amplitude);
  }
  return clip;
}

ReferenceFixture make_reference(const FixtureConfig& config) {
  std::mt19937_64 rng(config.seed);
  const std::size_t n = config.reference_frames;
  const std::vector<Event> events = schedule(n, rng);

  ReferenceFixture out;
  out.track.skeleton = puppet_skeleton();
  out.track.camera = puppet_camera();
  const std::size_t joints = out.track.skeleton.size();

  std::vector<PoseFrame> frames(n);
  for (std::size_t f = 0; f < n; ++f) {
    frames[f].frame_index = f;
    frames[f].root_translation = Vec3(0.0, 1.0, 0.0);
    frames[f].joint_rotations.assign(joints, Vec3::Zero());
    add_idle(frames[f], static_cast<double>(f) / config.fps);
  }

  out.audio.sample_rate = config.sample_rate;
  out.audio.samples.assign(
      static_cast<std::size_t>(std::llround(static_cast<double>(n) / config.fps * config.sample_rate)),
      0.0);
  std::size_t fillers = 0;
  for (const Event& e : events) {
    for (std::size_t u = 0; u < e.length; ++u) {
      add_event(frames[e.start + u], e, static_cast<double>(u));
    }
    if (e.kind == Gesture::kBeat) {
      const std::size_t stroke = e.start + kStrokeOffset;
      out.stroke_frames.push_back(stroke);
      const double t = static_cast<double>(stroke) / config.fps;
      add_click(out.audio, t, 0.3 + 0.2 * e.amplitude);
      out.transcript.push_back({filler(fillers++), t, t + 0.25});
    } else {
      const double t = static_cast<double>(e.start + 8) / config.fps;
      out.transcript.push_back({keyword_of(e.kind), t, t + 0.4});
    }
  }
  out.track.sequence = MotionSequence(config.fps, std::move(frames));
  return out;
}

TargetFixture make_target(const FixtureConfig& config) {
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> gap(18, 34);
  const std::size_t n = config.target_frames;

  // Keyword slots spread over the clip; clicks keep clear of them.
  struct Slot {
    std::size_t frame;
    const char* word;
  };
  const Slot slots[] = {{n * 2 / 15, "hello"}, {n * 7 / 15, "here"}, {n * 11 / 15, "more"}};

  TargetFixture out;
  out.audio.sample_rate = config.sample_rate;
  out.audio.samples.assign(
      static_cast<std::size_t>(std::llround(static_cast<double>(n) / config.fps * config.sample_rate)),
      0.0);
  std::size_t fillers = 0;
  for (std::size_t f = 15; f + 20 < n; f += gap(rng)) {
    bool clear = true;
    for (const Slot& s : slots) {
      if (f + 12 > s.frame && f < s.frame + 24) clear = false;
    }
    if (!clear) continue;
    out.click_frames.push_back(f);
    const double t = static_cast<double>(f) / config.fps;
    add_click(out.audio, t, 0.5);
    out.transcript.push_back({filler(fillers++), t, t + 0.25});
  }
  for (const Slot& s : slots) {
    const double t = static_cast<double>(s.frame) / config.fps;
    out.transcript.push_back({s.word, t, t + 0.4});
  }
  std::sort(out.transcript.begin(), out.transcript.end(),
            [](const TranscriptWord& a, const TranscriptWord& b) { return a.start_time < b.start_time; });
  return out;
}

void write_fixture(const std::filesystem::path& dir, const FixtureConfig& config) {
  std::filesystem::create_directories(dir);
  const ReferenceFixture ref = make_reference(config);
  const TargetFixture target = make_target(config);
  write_json_file(dir / "reference_pose.json", pose_track_to_json(ref.track));
  write_wav(ref.audio, dir / "reference.wav");
  write_json_file(dir / "reference_transcript.json", transcript_to_json(ref.transcript));
  write_wav(target.audio, dir / "target.wav");
  write_json_file(dir / "target_transcript.json", transcript_to_json(target.transcript));
}

}  // namespace vmg
