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

#include <filesystem>
#include <span>
#include <vector>

namespace vmg {

struct AudioClip {
  int sample_rate = 16000;
  std::vector<double> samples;  // mono, nominally in [-1, 1]

  double duration() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
};

/// Reads 16-bit PCM RIFF/WAVE; multi-channel input is downmixed by averaging.
/// Throws ParseError on malformed headers and IoError on missing files.
AudioClip read_wav(const std::filesystem::path& path);
AudioClip decode_wav(std::span<const unsigned char> bytes);

/// Writes mono 16-bit PCM, clipping samples to [-1, 1].
void write_wav(const AudioClip& clip, const std::filesystem::path& path);
std::vector<unsigned char> encode_wav(const AudioClip& clip);

}  // namespace vmg
