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
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vmg {

/// Audio features attached to one video frame.
struct FrameFeature {
  bool onset = false;
  std::string keyword;  // empty when no dictionary word is spoken
  bool speech = false;  // any transcript word covers the frame

  friend bool operator==(const FrameFeature&, const FrameFeature&) = default;
};

struct OnsetTrack {
  double fps = 30.0;
  std::vector<bool> flags;

  std::vector<std::size_t> activated_frames() const;
};

struct OnsetConfig {
  int window_size = 2048;             // STFT window, samples
  double delta = 0.1;                 // added to the local mean of normalized flux
  double threshold_half_window = 0.5; // seconds on each side for the local mean
  int peak_radius = 2;                // frames a peak must dominate on each side
};

/// Half-wave rectified spectral flux with one STFT frame per video frame.
/// The result has round(duration * fps) entries.
std::vector<double> spectral_flux(std::span<const double> samples, int sample_rate, double fps,
                                  int window_size = 2048);

/// Peaks of the max-normalized spectral flux that exceed the local mean
/// plus delta. Throws ValidationError on empty audio or sample rates below
/// 8 kHz.
OnsetTrack detect_onsets(std::span<const double> samples, int sample_rate, double fps,
                         const OnsetConfig& config = {});

struct TranscriptWord {
  std::string word;
  double start_time = 0.0;  // seconds
  double end_time = 0.0;

  friend bool operator==(const TranscriptWord&, const TranscriptWord&) = default;
};

/// Lowercases and strips surrounding punctuation so transcript tokens
/// compare equal to dictionary entries.
std::string normalize_word(std::string_view word);

class KeywordDictionary {
 public:
  using Categories = std::vector<std::pair<std::string, std::vector<std::string>>>;

  KeywordDictionary() = default;
  /// Throws ValidationError on duplicate or non-lowercase words.
  explicit KeywordDictionary(Categories categories);

  /// The common keyword list: greeting, counting, direction, sentiment,
  /// action, relative, others.
  static KeywordDictionary standard();

  bool contains(const std::string& word) const { return category_.contains(word); }
  /// Empty string when the word is not a keyword.
  std::string category_of(const std::string& word) const;
  const Categories& categories() const noexcept { return categories_; }
  std::size_t size() const noexcept { return category_.size(); }

 private:
  Categories categories_;
  std::map<std::string, std::string> category_;
};

struct KeywordLabels {
  std::vector<std::string> labels;     // one per frame, empty for no keyword
  std::vector<std::string> conflicts;  // human-readable overlap reports
};

/// Frames in [round(start * fps), round(end * fps)) of each dictionary word
/// carry that word. Overlaps go to the word with the earliest start time.
KeywordLabels match_keywords(std::span<const TranscriptWord> words,
                             const KeywordDictionary& dictionary, double fps,
                             std::size_t total_frames);

/// Frames covered by any transcript word, keyword or not.
std::vector<bool> speech_frames(std::span<const TranscriptWord> words, double fps,
                                std::size_t total_frames);

struct AudioFeatureTrack {
  double fps = 30.0;
  std::vector<FrameFeature> frames;

  std::size_t size() const noexcept { return frames.size(); }
};

/// Zips onset flags, keyword labels and the speech mask into one track.
/// Throws StructuralError when lengths disagree.
AudioFeatureTrack make_feature_track(const OnsetTrack& onsets, const KeywordLabels& keywords,
                                     const std::vector<bool>& speech);

enum class TargetKind { kOnset, kKeyword, kEnd };

/// What the graph node closing a segment must carry.
struct TargetFeature {
  TargetKind kind = TargetKind::kEnd;
  std::string keyword;

  static TargetFeature onset() { return {TargetKind::kOnset, {}}; }
  static TargetFeature word(std::string w) { return {TargetKind::kKeyword, std::move(w)}; }
  static TargetFeature end() { return {TargetKind::kEnd, {}}; }

  friend bool operator==(const TargetFeature&, const TargetFeature&) = default;
};

/// Target timeline split at feature activations. Endpoints are 1-based frame
/// numbers a_0 = 1 < a_1 < ... < a_{S+1} = N_t; segment s runs from
/// endpoint s to endpoint s + 1 and must close on `features[s]`.
struct SegmentList {
  std::vector<std::size_t> endpoints;
  std::vector<TargetFeature> features;
  std::size_t total_frames = 0;

  std::size_t segment_count() const noexcept {
    return endpoints.empty() ? 0 : endpoints.size() - 1;
  }
  std::size_t length(std::size_t s) const { return endpoints[s + 1] - endpoints[s]; }
  std::vector<std::size_t> lengths() const;

  /// Throws ValidationError if the endpoint invariants do not hold.
  void validate() const;
};

/// Interior endpoints are frames with an onset or the first frame of a
/// keyword span; a keyword takes precedence when both coincide.
SegmentList segment_target(const AudioFeatureTrack& features);

}  // namespace vmg
