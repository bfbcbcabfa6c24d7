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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "vmgraph/audio_features.hpp"
#include "vmgraph/path_search.hpp"
#include "vmgraph/pose_model.hpp"
#include "vmgraph/reenact_assembly.hpp"
#include "vmgraph/silhouette.hpp"

namespace vmg {

using Json = nlohmann::ordered_json;

/// Skeleton, camera and per-frame pose parameters of a reference performance.
struct PoseTrack {
  Skeleton skeleton;
  MotionSequence sequence;
  CameraModel camera;
};

/// Search output together with the segments it was run against.
struct SearchDocument {
  SearchResult result;
  SegmentList segments;
  BeamConfig config;
  std::string graph_sha256;
};

// Every to_json/from_json pair below writes a document tagged with
// "format" and "version"; readers reject other tags with ParseError.

Json pose_track_to_json(const PoseTrack& track);
PoseTrack pose_track_from_json(const Json& doc);

Json camera_to_json(const CameraModel& camera);
CameraModel camera_from_json(const Json& doc);

/// Per-frame features stored sparsely: onset indices, keyword spans and
/// speech ranges. Segments are written alongside when given.
Json features_to_json(const AudioFeatureTrack& track, const SegmentList* segments = nullptr);
AudioFeatureTrack features_from_json(const Json& doc);
/// Segments stored in a features document, or segment_target() of its track.
SegmentList segments_from_features_json(const Json& doc);

Json segments_to_json(const SegmentList& segments);
SegmentList segments_from_json(const Json& doc);

/// Accepts a bare array or {"words": [...]} of {word, start, end} records.
std::vector<TranscriptWord> transcript_from_json(const Json& doc);
Json transcript_to_json(std::span<const TranscriptWord> words);

/// Category name to word list, categories in file order.
KeywordDictionary dictionary_from_json(const Json& doc);
Json dictionary_to_json(const KeywordDictionary& dictionary);

Json search_to_json(const SearchDocument& doc);
SearchDocument search_from_json(const Json& doc);

Json edl_to_json(const EditDecisionList& edl);
EditDecisionList edl_from_json(const Json& doc);

std::string sha256_hex(std::span<const unsigned char> bytes);

std::vector<unsigned char> read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);

Json read_json_file(const std::filesystem::path& path);
/// Two-space indented, newline terminated.
void write_json_file(const std::filesystem::path& path, const Json& doc);
std::string dump_json(const Json& doc);

}  // namespace vmg
