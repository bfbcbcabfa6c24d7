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

#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "vmgraph/error.hpp"
#include "vmgraph/fixture.hpp"
#include "vmgraph/formats.hpp"

using namespace vmg;
namespace fs = std::filesystem;

namespace {

Json reparse(const Json& j) { return Json::parse(dump_json(j)); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vmgraph_test_formats";
  fs::create_directories(dir);
  return dir / name;
}

PoseTrack small_track() {
  FixtureConfig c;
  c.reference_frames = 40;
  c.target_frames = 30;
  return make_reference(c).track;
}

}  // namespace

TEST_CASE("pose track round trip") {
  const PoseTrack t = small_track();
  const PoseTrack back = pose_track_from_json(reparse(pose_track_to_json(t)));
  REQUIRE(back.skeleton.size() == t.skeleton.size());
  for (std::size_t j = 0; j < t.skeleton.size(); ++j) {
    CHECK(back.skeleton[j].name == t.skeleton[j].name);
    CHECK(back.skeleton[j].parent == t.skeleton[j].parent);
    CHECK(back.skeleton[j].rest_offset == t.skeleton[j].rest_offset);
    CHECK(back.skeleton[j].capsule_radius == t.skeleton[j].capsule_radius);
  }
  CHECK(back.sequence.fps() == t.sequence.fps());
  CHECK(back.sequence.frames() == t.sequence.frames());
  CHECK(back.camera.rotation == t.camera.rotation);
  CHECK(back.camera.translation == t.camera.translation);
  CHECK(back.camera.focal_length == t.camera.focal_length);
  CHECK(back.camera.width == t.camera.width);

  Json bad = pose_track_to_json(t);
  bad["format"] = "something.else";
  CHECK_THROWS_AS(pose_track_from_json(bad), ParseError);
  bad = pose_track_to_json(t);
  bad["frames"][3]["joint_rotations"].erase(0);
  CHECK_THROWS_AS(pose_track_from_json(bad), Error);
  bad = pose_track_to_json(t);
  bad.erase("fps");
  CHECK_THROWS_AS(pose_track_from_json(bad), ParseError);
}

TEST_CASE("features and segments round trip") {
  AudioFeatureTrack f;
  f.fps = 30;
  f.frames.resize(20);
  f.frames[4].onset = true;
  f.frames[9].onset = true;
  for (std::size_t i = 11; i < 14; ++i) f.frames[i].keyword = "hello";
  for (std::size_t i = 10; i < 16; ++i) f.frames[i].speech = true;
  const SegmentList segs = segment_target(f);
  const Json j = reparse(features_to_json(f, &segs));
  const AudioFeatureTrack back = features_from_json(j);
  CHECK(back.fps == f.fps);
  CHECK(back.frames == f.frames);
  const SegmentList s2 = segments_from_features_json(j);
  CHECK(s2.endpoints == segs.endpoints);
  CHECK(s2.features == segs.features);
  CHECK(s2.total_frames == segs.total_frames);
  const SegmentList s3 = segments_from_json(reparse(segments_to_json(segs)));
  CHECK(s3.endpoints == segs.endpoints);
  CHECK(s3.features == segs.features);
}

TEST_CASE("transcripts and dictionaries") {
  const std::vector<TranscriptWord> words{{"Hello,", 0.5, 0.9}, {"there", 1.0, 1.25}};
  CHECK(transcript_from_json(reparse(transcript_to_json(words))) == words);
  const Json bare = Json::parse(R"([{"word":"hi","start":0.1,"end":0.2}])");
  CHECK(transcript_from_json(bare).size() == 1);
  CHECK_THROWS_AS(transcript_from_json(Json::parse(R"({"words":[{"word":"hi"}]})")), ParseError);

  const KeywordDictionary d = KeywordDictionary::standard();
  const KeywordDictionary d2 = dictionary_from_json(reparse(dictionary_to_json(d)));
  CHECK(d2.categories() == d.categories());
  CHECK_THROWS_AS(dictionary_from_json(Json::parse(R"({"categories":{"a":["x","x"]}})")), Error);
}

TEST_CASE("search documents round trip") {
  SearchDocument doc;
  doc.graph_sha256 = std::string(64, 'a');
  doc.config.seed = 11;
  doc.config.beam_width = 5;
  doc.config.blend_margin = 2;
  doc.segments.endpoints = {1, 4, 8};
  doc.segments.features = {TargetFeature::word("here"), TargetFeature::end()};
  doc.segments.total_frames = 8;
  PathCandidate p;
  p.nodes = {3, 4, 5, 6, 20, 21, 22, 23};
  p.segment_boundaries = {0, 3, 7};
  p.transition_cost = 0.375;
  p.duration_cost = 1.0 / 3.0;
  doc.result.paths = {p};
  const SearchDocument back = search_from_json(reparse(search_to_json(doc)));
  CHECK(back.graph_sha256 == doc.graph_sha256);
  CHECK(back.config.seed == 11);
  CHECK(back.config.beam_width == 5);
  CHECK(back.config.blend_margin == 2);
  CHECK(back.segments.endpoints == doc.segments.endpoints);
  CHECK(back.segments.features == doc.segments.features);
  CHECK(back.result.paths == doc.result.paths);
  CHECK_FALSE(back.result.unreachable_segment.has_value());
}

TEST_CASE("edit decision lists round trip") {
  const PoseTrack t = small_track();
  EditDecisionList edl;
  edl.fps = 30;
  edl.blend_k = 2;
  edl.graph_sha256 = "cd";
  edl.seed = 9;
  RunEntry run;
  run.source_frames = {1, 2, 3};
  run.source_positions = {1.0, 2.0, 3.0};
  edl.entries.emplace_back(run);
  edl.entries.emplace_back(make_blend_schedule(t.sequence, 4, 20, 2, 3));
  edl.total_frames = 8;
  edl.speech_ranges = {{2, 5}};
  const Json j = reparse(edl_to_json(edl));
  CHECK(j["slots_per_transition"] == 5);
  const EditDecisionList back = edl_from_json(j);
  CHECK(edl_to_json(back) == j);
  CHECK(back.transition_count() == 1);
  CHECK(edl_poses(back, t.sequence) == edl_poses(edl, t.sequence));
}

TEST_CASE("files") {
  const std::string abc = "abc";
  CHECK(sha256_hex(std::span(reinterpret_cast<const unsigned char*>(abc.data()), abc.size())) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  const fs::path p = scratch("doc.json");
  write_json_file(p, Json{{"a", 1}});
  CHECK_FALSE(fs::exists(fs::path(p.string() + ".tmp")));
  CHECK(read_json_file(p)["a"] == 1);

  const fs::path broken = scratch("broken.json");
  { std::ofstream(broken) << "{\"a\": [1, 2"; }
  CHECK_THROWS_AS(read_json_file(broken), ParseError);
  CHECK_THROWS_AS(read_json_file(scratch("missing.json")), IoError);
  CHECK_THROWS_AS(read_file(scratch("missing.bin")), IoError);
}
