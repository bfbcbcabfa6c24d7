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

#include "vmgraph/audio_features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

#include <fftw3.h>

#include "vmgraph/error.hpp"

namespace vmg {
namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(n)));
    out_ = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n / 2 + 1)));
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }

  double* input() { return in_; }

  void magnitudes(std::vector<double>& mag) {
    fftw_execute(plan_);
    mag.resize(static_cast<std::size_t>(n_ / 2 + 1));
    for (std::size_t k = 0; k < mag.size(); ++k) {
      mag[k] = std::hypot(out_[k][0], out_[k][1]);
    }
  }

 private:
  int n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

void check_audio(std::span<const double> samples, int sample_rate, double fps) {
  if (samples.empty()) {
    throw ValidationError("audio has no samples");
  }
  if (sample_rate < 8000) {
    throw ValidationError("sample rate " + std::to_string(sample_rate) + " Hz is below 8000 Hz");
  }
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw ValidationError("fps must be positive");
  }
}

std::size_t frame_of(double seconds, double fps) {
  return static_cast<std::size_t>(std::llround(std::max(0.0, seconds * fps)));
}

}  // namespace

std::vector<std::size_t> OnsetTrack::activated_frames() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) out.push_back(i);
  }
  return out;
}

std::vector<double> spectral_flux(std::span<const double> samples, int sample_rate, double fps,
                                  int window_size) {
  check_audio(samples, sample_rate, fps);
  if (window_size < 2 || window_size % 2 != 0) {
    throw ValidationError("STFT window must be a positive even size");
  }
  const double duration = static_cast<double>(samples.size()) / sample_rate;
  const auto frames = static_cast<std::size_t>(std::llround(duration * fps));
  const double hop = sample_rate / fps;
  const auto w = static_cast<std::size_t>(window_size);

  std::vector<double> hann(w);
  for (std::size_t n = 0; n < w; ++n) {
    hann[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                    static_cast<double>(w));
  }

  RealFft fft(window_size);
  std::vector<double> prev(w / 2 + 1, 0.0);
  std::vector<double> mag;
  std::vector<double> flux(frames, 0.0);
  const auto total = static_cast<long long>(samples.size());
  for (std::size_t t = 0; t < frames; ++t) {
    const long long center = std::llround(static_cast<double>(t) * hop);
    const long long first = center - static_cast<long long>(w / 2);
    double* in = fft.input();
    for (std::size_t n = 0; n < w; ++n) {
      const long long idx = first + static_cast<long long>(n);
      in[n] = (idx >= 0 && idx < total) ? samples[static_cast<std::size_t>(idx)] * hann[n] : 0.0;
    }
    fft.magnitudes(mag);
    double sum = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
      sum += std::max(0.0, mag[k] - prev[k]);
    }
    flux[t] = sum;
    prev.swap(mag);
  }
  return flux;
}

OnsetTrack detect_onsets(std::span<const double> samples, int sample_rate, double fps,
                         const OnsetConfig& config) {
  check_audio(samples, sample_rate, fps);
  std::vector<double> flux = spectral_flux(samples, sample_rate, fps, config.window_size);
  OnsetTrack track{fps, std::vector<bool>(flux.size(), false)};
  const double peak = flux.empty() ? 0.0 : *std::max_element(flux.begin(), flux.end());
  if (!(peak > 0.0)) {
    return track;
  }
  for (double& v : flux) v /= peak;

  const std::size_t n = flux.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + flux[i];
  const auto half = static_cast<std::size_t>(
      std::max(1LL, std::llround(config.threshold_half_window * fps)));
  const auto radius = static_cast<std::size_t>(std::max(1, config.peak_radius));

  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= half ? t - half : 0;
    const std::size_t hi = std::min(n, t + half + 1);
    const double mean = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    if (!(flux[t] > mean + config.delta)) continue;
    bool dominant = true;
    for (std::size_t j = 1; j <= radius && dominant; ++j) {
      if (t >= j && !(flux[t] > flux[t - j])) dominant = false;
      if (t + j < n && !(flux[t] >= flux[t + j])) dominant = false;
    }
    track.flags[t] = dominant;
  }
  return track;
}

std::string normalize_word(std::string_view word) {
  std::size_t b = 0;
  std::size_t e = word.size();
  auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) && c != '\''; };
  while (b < e && (punct(word[b]) || std::isspace(static_cast<unsigned char>(word[b])))) ++b;
  while (e > b && (punct(word[e - 1]) || std::isspace(static_cast<unsigned char>(word[e - 1])))) --e;
  std::string out(word.substr(b, e - b));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

KeywordDictionary::KeywordDictionary(Categories categories) : categories_(std::move(categories)) {
  for (const auto& [name, words] : categories_) {
    for (const std::string& w : words) {
      if (w.empty() || normalize_word(w) != w) {
        throw ValidationError("dictionary word '" + w + "' must be non-empty lowercase text");
      }
      if (!category_.emplace(w, name).second) {
        throw ValidationError("dictionary word '" + w + "' appears more than once");
      }
    }
  }
}

KeywordDictionary KeywordDictionary::standard() {
  return KeywordDictionary(Categories{
      {"greeting", {"hey", "hi", "hello"}},
      {"counting", {"one", "two", "three", "first", "second", "third"}},
      {"direction",
       {"east", "west", "north", "south", "back", "front", "away", "here", "around"}},
      {"sentiment", {"crazy", "incredible", "surprising", "screaming"}},
      {"action", {"walk", "drive", "ride", "enter", "open", "attach", "take", "move"}},
      {"relative", {"more", "less", "much", "few"}},
      {"others", {"called"}},
  });
}

std::string KeywordDictionary::category_of(const std::string& word) const {
  auto it = category_.find(word);
  return it == category_.end() ? std::string{} : it->second;
}

KeywordLabels match_keywords(std::span<const TranscriptWord> words,
                             const KeywordDictionary& dictionary, double fps,
                             std::size_t total_frames) {
  if (!(fps > 0.0)) {
    throw ValidationError("fps must be positive");
  }
  std::vector<TranscriptWord> sorted;
  sorted.reserve(words.size());
  for (const TranscriptWord& w : words) {
    if (!(w.start_time >= 0.0) || !(w.end_time > w.start_time) || !std::isfinite(w.end_time)) {
      throw ValidationError("word '" + w.word + "' has invalid times [" +
                            std::to_string(w.start_time) + ", " + std::to_string(w.end_time) +
                            ")");
    }
    sorted.push_back({normalize_word(w.word), w.start_time, w.end_time});
  }
  std::sort(sorted.begin(), sorted.end(), [](const TranscriptWord& a, const TranscriptWord& b) {
    if (a.start_time != b.start_time) return a.start_time < b.start_time;
    if (a.end_time != b.end_time) return a.end_time < b.end_time;
    return a.word < b.word;
  });

  KeywordLabels out;
  out.labels.assign(total_frames, std::string{});
  std::set<std::pair<std::string, std::string>> reported;
  for (const TranscriptWord& w : sorted) {
    if (!dictionary.contains(w.word)) continue;
    const std::size_t lo = std::min(frame_of(w.start_time, fps), total_frames);
    const std::size_t hi = std::min(frame_of(w.end_time, fps), total_frames);
    for (std::size_t f = lo; f < hi; ++f) {
      std::string& label = out.labels[f];
      if (label.empty()) {
        label = w.word;
      } else if (label != w.word && reported.emplace(label, w.word).second) {
        out.conflicts.push_back("keyword '" + w.word + "' at " + std::to_string(w.start_time) +
                                "s overlaps earlier keyword '" + label + "'; keeping '" + label +
                                "'");
      }
    }
  }
  return out;
}

std::vector<bool> speech_frames(std::span<const TranscriptWord> words, double fps,
                                std::size_t total_frames) {
  std::vector<bool> out(total_frames, false);
  for (const TranscriptWord& w : words) {
    const std::size_t lo = std::min(frame_of(w.start_time, fps), total_frames);
    const std::size_t hi = std::min(frame_of(w.end_time, fps), total_frames);
    for (std::size_t f = lo; f < hi; ++f) out[f] = true;
  }
  return out;
}

AudioFeatureTrack make_feature_track(const OnsetTrack& onsets, const KeywordLabels& keywords,
                                     const std::vector<bool>& speech) {
  const std::size_t n = onsets.flags.size();
  if (keywords.labels.size() != n || speech.size() != n) {
    throw StructuralError("feature lengths differ: onsets " + std::to_string(n) + ", keywords " +
                          std::to_string(keywords.labels.size()) + ", speech " +
                          std::to_string(speech.size()));
  }
  AudioFeatureTrack track;
  track.fps = onsets.fps;
  track.frames.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    track.frames[i] = {onsets.flags[i], keywords.labels[i], speech[i]};
  }
  return track;
}

std::vector<std::size_t> SegmentList::lengths() const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < segment_count(); ++s) out.push_back(length(s));
  return out;
}

void SegmentList::validate() const {
  if (endpoints.empty() || endpoints.front() != 1 || endpoints.back() != total_frames) {
    throw ValidationError("segment endpoints must run from frame 1 to the last frame");
  }
  for (std::size_t i = 1; i < endpoints.size(); ++i) {
    if (endpoints[i] <= endpoints[i - 1]) {
      throw ValidationError("segment endpoints must be strictly increasing");
    }
  }
  if (features.size() != segment_count()) {
    throw ValidationError("expected one target feature per segment");
  }
  if (!features.empty() && features.back().kind != TargetKind::kEnd) {
    throw ValidationError("the final segment must close on the end of the target");
  }
}

SegmentList segment_target(const AudioFeatureTrack& features) {
  const std::size_t n = features.size();
  if (n == 0) {
    throw ValidationError("cannot segment an empty feature track");
  }
  SegmentList out;
  out.total_frames = n;
  out.endpoints.push_back(1);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const FrameFeature& f = features.frames[i];
    const bool keyword_starts =
        !f.keyword.empty() && f.keyword != features.frames[i - 1].keyword;
    if (keyword_starts) {
      out.endpoints.push_back(i + 1);
      out.features.push_back(TargetFeature::word(f.keyword));
    } else if (f.onset) {
      out.endpoints.push_back(i + 1);
      out.features.push_back(TargetFeature::onset());
    }
  }
  if (n > 1) {
    out.endpoints.push_back(n);
    out.features.push_back(TargetFeature::end());
  }
  return out;
}

}  // namespace vmg
