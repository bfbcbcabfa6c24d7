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

#include "vmgraph/formats.hpp"

#include <array>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <system_error>

#include <openssl/evp.h>

#include "vmgraph/error.hpp"

namespace vmg {
namespace {

constexpr int kVersion = 1;

void expect_format(const Json& doc, const char* format) {
  if (!doc.is_object() || !doc.contains("format") || doc["format"] != format) {
    throw ParseError(std::string("document is not a ") + format, 0);
  }
  if (!doc.contains("version") || doc["version"] != kVersion) {
    throw ParseError(std::string("unsupported ") + format + " version", 0);
  }
}

const Json& field(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "'", 0);
  }
  return doc[key];
}

// nlohmann type errors become ParseError so callers see one failure type.
template <typename T>
T as(const Json& value, const char* what) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("field '") + what + "': " + e.what(), 0);
  }
}

Json vec3(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const Json& j, const char* what) {
  const auto v = as<std::vector<double>>(j, what);
  if (v.size() != 3) throw ParseError(std::string("field '") + what + "' must have 3 entries", 0);
  return {v[0], v[1], v[2]};
}

Json target_to_json(const TargetFeature& t) {
  switch (t.kind) {
    case TargetKind::kOnset:
      return Json{{"kind", "onset"}};
    case TargetKind::kKeyword:
      return Json{{"kind", "keyword"}, {"word", t.keyword}};
    case TargetKind::kEnd:
      break;
  }
  return Json{{"kind", "end"}};
}

TargetFeature target_from_json(const Json& j) {
  const auto kind = as<std::string>(field(j, "kind"), "kind");
  if (kind == "onset") return TargetFeature::onset();
  if (kind == "keyword") return TargetFeature::word(as<std::string>(field(j, "word"), "word"));
  if (kind == "end") return TargetFeature::end();
  throw ParseError("unknown target feature kind '" + kind + "'", 0);
}

Json pose_to_json(const PoseFrame& pose) {
  Json rot = Json::array();
  for (const Vec3& r : pose.joint_rotations) rot.push_back(vec3(r));
  return Json{{"root_translation", vec3(pose.root_translation)}, {"joint_rotations", std::move(rot)}};
}

PoseFrame pose_from_json(const Json& j, std::size_t index) {
  PoseFrame pose;
  pose.frame_index = index;
  pose.root_translation = vec3_from(field(j, "root_translation"), "root_translation");
  for (const Json& r : field(j, "joint_rotations")) {
    pose.joint_rotations.push_back(vec3_from(r, "joint_rotations"));
  }
  return pose;
}

}  // namespace

Json camera_to_json(const CameraModel& camera) {
  Json rotation = Json::array();
  for (int r = 0; r < 3; ++r) {
    rotation.push_back(Json::array({camera.rotation(r, 0), camera.rotation(r, 1), camera.rotation(r, 2)}));
  }
  return Json{{"focal_length", camera.focal_length},
              {"principal_point", Json::array({camera.principal_point.x(), camera.principal_point.y()})},
              {"width", camera.width},
              {"height", camera.height},
              {"rotation", std::move(rotation)},
              {"translation", vec3(camera.translation)}};
}

CameraModel camera_from_json(const Json& doc) {
  CameraModel cam;
  cam.focal_length = as<double>(field(doc, "focal_length"), "focal_length");
  const auto pp = as<std::vector<double>>(field(doc, "principal_point"), "principal_point");
  if (pp.size() != 2) throw ParseError("principal_point must have 2 entries", 0);
  cam.principal_point = {pp[0], pp[1]};
  cam.width = as<int>(field(doc, "width"), "width");
  cam.height = as<int>(field(doc, "height"), "height");
  if (doc.contains("rotation")) {
    const auto& rows = doc["rotation"];
    if (!rows.is_array() || rows.size() != 3) throw ParseError("rotation must be 3x3", 0);
    for (int r = 0; r < 3; ++r) cam.rotation.row(r) = vec3_from(rows[static_cast<std::size_t>(r)], "rotation").transpose();
  }
  if (doc.contains("translation")) cam.translation = vec3_from(doc["translation"], "translation");
  try {
    cam.validate();
  } catch (const ValidationError& e) {
    throw ParseError(std::string("invalid camera: ") + e.what(), 0);
  }
  return cam;
}

Json pose_track_to_json(const PoseTrack& track) {
  Json joints = Json::array();
  for (const Joint& j : track.skeleton.joints()) {
    joints.push_back(Json{{"name", j.name},
                          {"parent", j.parent ? Json(*j.parent) : Json(nullptr)},
                          {"rest_offset", vec3(j.rest_offset)},
                          {"capsule_radius", j.capsule_radius}});
  }
  Json frames = Json::array();
  for (const PoseFrame& f : track.sequence.frames()) frames.push_back(pose_to_json(f));
  return Json{{"format", "vmgraph.pose_track"},
              {"version", kVersion},
              {"units", {{"length", "meters"}, {"angle", "radians"}}},
              {"fps", track.sequence.fps()},
              {"camera", camera_to_json(track.camera)},
              {"skeleton", {{"joints", std::move(joints)}}},
              {"frames", std::move(frames)}};
}

PoseTrack pose_track_from_json(const Json& doc) {
  expect_format(doc, "vmgraph.pose_track");
  std::vector<Joint> joints;
  for (const Json& j : field(field(doc, "skeleton"), "joints")) {
    Joint joint;
    joint.name = as<std::string>(field(j, "name"), "name");
    const Json& parent = field(j, "parent");
    if (!parent.is_null()) joint.parent = as<std::size_t>(parent, "parent");
    joint.rest_offset = vec3_from(field(j, "rest_offset"), "rest_offset");
    joint.capsule_radius = as<double>(field(j, "capsule_radius"), "capsule_radius");
    joints.push_back(std::move(joint));
  }
  PoseTrack track;
  std::vector<PoseFrame> frames;
  const Json& raw = field(doc, "frames");
  for (std::size_t i = 0; i < raw.size(); ++i) frames.push_back(pose_from_json(raw[i], i));
  try {
    track.skeleton = Skeleton(std::move(joints));
    track.sequence = MotionSequence(as<double>(field(doc, "fps"), "fps"), std::move(frames));
    for (const PoseFrame& f : track.sequence.frames()) validate_pose(track.skeleton, f);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("invalid pose track: ") + e.what(), 0);
  } catch (const StructuralError& e) {
    throw ParseError(std::string("invalid pose track: ") + e.what(), 0);
  }
  if (doc.contains("camera")) track.camera = camera_from_json(doc["camera"]);
  return track;
}

Json segments_to_json(const SegmentList& segments) {
  Json features = Json::array();
  for (const TargetFeature& f : segments.features) features.push_back(target_to_json(f));
  return Json{{"total_frames", segments.total_frames},
              {"endpoints", segments.endpoints},
              {"lengths", segments.lengths()},
              {"features", std::move(features)}};
}

SegmentList segments_from_json(const Json& doc) {
  SegmentList s;
  s.total_frames = as<std::size_t>(field(doc, "total_frames"), "total_frames");
  s.endpoints = as<std::vector<std::size_t>>(field(doc, "endpoints"), "endpoints");
  for (const Json& f : field(doc, "features")) s.features.push_back(target_from_json(f));
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ParseError(std::string("invalid segments: ") + e.what(), 0);
  }
  return s;
}

Json features_to_json(const AudioFeatureTrack& track, const SegmentList* segments) {
  Json onsets = Json::array();
  Json keywords = Json::array();
  Json speech = Json::array();
  const auto& f = track.frames;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].onset) onsets.push_back(i);
    if (!f[i].keyword.empty() && (i == 0 || f[i - 1].keyword != f[i].keyword)) {
      std::size_t end = i;
      while (end < f.size() && f[end].keyword == f[i].keyword) ++end;
      keywords.push_back(Json{{"word", f[i].keyword}, {"first_frame", i}, {"end_frame", end}});
    }
    if (f[i].speech && (i == 0 || !f[i - 1].speech)) {
      std::size_t end = i;
      while (end < f.size() && f[end].speech) ++end;
      speech.push_back(Json::array({i, end}));
    }
  }
  Json doc{{"format", "vmgraph.audio_features"},
           {"version", kVersion},
           {"fps", track.fps},
           {"frame_count", f.size()},
           {"onsets", std::move(onsets)},
           {"keywords", std::move(keywords)},
           {"speech", std::move(speech)}};
  if (segments) doc["segments"] = segments_to_json(*segments);
  return doc;
}

AudioFeatureTrack features_from_json(const Json& doc) {
  expect_format(doc, "vmgraph.audio_features");
  AudioFeatureTrack track;
  track.fps = as<double>(field(doc, "fps"), "fps");
  const auto n = as<std::size_t>(field(doc, "frame_count"), "frame_count");
  track.frames.resize(n);
  for (const Json& o : field(doc, "onsets")) {
    const auto i = as<std::size_t>(o, "onsets");
    if (i >= n) throw ParseError("onset frame beyond frame_count", 0);
    track.frames[i].onset = true;
  }
  for (const Json& k : field(doc, "keywords")) {
    const auto word = as<std::string>(field(k, "word"), "word");
    const auto first = as<std::size_t>(field(k, "first_frame"), "first_frame");
    const auto end = as<std::size_t>(field(k, "end_frame"), "end_frame");
    if (first >= end || end > n) throw ParseError("keyword span outside the track", 0);
    for (std::size_t i = first; i < end; ++i) track.frames[i].keyword = word;
  }
  if (doc.contains("speech")) {
    for (const Json& r : doc["speech"]) {
      const auto range = as<std::vector<std::size_t>>(r, "speech");
      if (range.size() != 2 || range[0] >= range[1] || range[1] > n) {
        throw ParseError("speech range outside the track", 0);
      }
      for (std::size_t i = range[0]; i < range[1]; ++i) track.frames[i].speech = true;
    }
  }
  return track;
}

SegmentList segments_from_features_json(const Json& doc) {
  if (doc.contains("segments")) return segments_from_json(doc["segments"]);
  return segment_target(features_from_json(doc));
}

std::vector<TranscriptWord> transcript_from_json(const Json& doc) {
  const Json& list = doc.is_array() ? doc : field(doc, "words");
  std::vector<TranscriptWord> words;
  for (const Json& w : list) {
    words.push_back({as<std::string>(field(w, "word"), "word"), as<double>(field(w, "start"), "start"),
                     as<double>(field(w, "end"), "end")});
  }
  return words;
}

Json transcript_to_json(std::span<const TranscriptWord> words) {
  Json list = Json::array();
  for (const TranscriptWord& w : words) {
    list.push_back(Json{{"word", w.word}, {"start", w.start_time}, {"end", w.end_time}});
  }
  return Json{{"words", std::move(list)}};
}

KeywordDictionary dictionary_from_json(const Json& doc) {
  const Json& cats = doc.contains("categories") ? doc["categories"] : doc;
  if (!cats.is_object()) throw ParseError("dictionary must map category names to word lists", 0);
  KeywordDictionary::Categories categories;
  for (const auto& [name, words] : cats.items()) {
    categories.emplace_back(name, as<std::vector<std::string>>(words, "categories"));
  }
  try {
    return KeywordDictionary(std::move(categories));
  } catch (const ValidationError& e) {
    throw ParseError(std::string("invalid dictionary: ") + e.what(), 0);
  }
}

Json dictionary_to_json(const KeywordDictionary& dictionary) {
  Json cats = Json::object();
  for (const auto& [name, words] : dictionary.categories()) cats[name] = words;
  return Json{{"categories", std::move(cats)}};
}

Json search_to_json(const SearchDocument& doc) {
  Json paths = Json::array();
  for (const PathCandidate& p : doc.result.paths) {
    paths.push_back(Json{{"nodes", p.nodes},
                         {"segment_boundaries", p.segment_boundaries},
                         {"achieved_lengths", p.achieved_lengths()},
                         {"transition_cost", p.transition_cost},
                         {"duration_cost", p.duration_cost},
                         {"total_cost", p.total_cost()}});
  }
  return Json{{"format", "vmgraph.search_result"},
              {"version", kVersion},
              {"graph_sha256", doc.graph_sha256},
              {"seed", doc.config.seed},
              {"beam_width", doc.config.beam_width},
              {"duration_window", Json::array({doc.config.window_low, doc.config.window_high})},
              {"duration_weight", doc.config.duration_weight},
              {"blend_margin", doc.config.blend_margin},
              {"onset_free_interior", doc.config.onset_free_interior},
              {"segments", segments_to_json(doc.segments)},
              {"unreachable_segment", doc.result.unreachable_segment
                                          ? Json(*doc.result.unreachable_segment)
                                          : Json(nullptr)},
              {"paths", std::move(paths)}};
}

SearchDocument search_from_json(const Json& doc) {
  expect_format(doc, "vmgraph.search_result");
  SearchDocument out;
  out.graph_sha256 = as<std::string>(field(doc, "graph_sha256"), "graph_sha256");
  out.config.seed = as<std::uint64_t>(field(doc, "seed"), "seed");
  out.config.beam_width = as<std::size_t>(field(doc, "beam_width"), "beam_width");
  const auto window = as<std::vector<double>>(field(doc, "duration_window"), "duration_window");
  if (window.size() != 2) throw ParseError("duration_window must have 2 entries", 0);
  out.config.window_low = window[0];
  out.config.window_high = window[1];
  out.config.duration_weight = as<double>(field(doc, "duration_weight"), "duration_weight");
  if (doc.contains("blend_margin")) out.config.blend_margin = as<int>(doc["blend_margin"], "blend_margin");
  if (doc.contains("onset_free_interior")) {
    out.config.onset_free_interior = as<bool>(doc["onset_free_interior"], "onset_free_interior");
  }
  out.segments = segments_from_json(field(doc, "segments"));
  const Json& unreachable = field(doc, "unreachable_segment");
  if (!unreachable.is_null()) out.result.unreachable_segment = as<std::size_t>(unreachable, "unreachable_segment");
  for (const Json& p : field(doc, "paths")) {
    PathCandidate c;
    c.nodes = as<std::vector<std::size_t>>(field(p, "nodes"), "nodes");
    c.segment_boundaries = as<std::vector<std::size_t>>(field(p, "segment_boundaries"), "segment_boundaries");
    c.transition_cost = as<double>(field(p, "transition_cost"), "transition_cost");
    c.duration_cost = as<double>(field(p, "duration_cost"), "duration_cost");
    if (c.nodes.empty() || c.segment_boundaries.empty()) throw ParseError("empty path record", 0);
    out.result.paths.push_back(std::move(c));
  }
  return out;
}

Json edl_to_json(const EditDecisionList& edl) {
  Json entries = Json::array();
  for (const EdlEntry& entry : edl.entries) {
    if (const auto* run = std::get_if<RunEntry>(&entry)) {
      entries.push_back(Json{{"type", "run"},
                             {"output_start", run->output_start},
                             {"slot_count", run->slot_count()},
                             {"speed_factor", run->speed_factor},
                             {"source_frames", run->source_frames},
                             {"source_positions", run->source_positions}});
    } else {
      const auto& b = std::get<BlendSchedule>(entry);
      Json steps = Json::array();
      for (const BlendStep& s : b.steps) {
        Json step = pose_to_json(s.pose);
        step["alpha"] = s.alpha;
        step["src_frame"] = s.src_frame;
        step["dst_frame"] = s.dst_frame;
        steps.push_back(std::move(step));
      }
      entries.push_back(Json{{"type", "transition"},
                             {"output_start", b.output_start},
                             {"slot_count", b.slot_count()},
                             {"from_frame", b.from_frame},
                             {"to_frame", b.to_frame},
                             {"k", b.k},
                             {"src_window", Json::array({b.src_window().first, b.src_window().second})},
                             {"dst_window", Json::array({b.dst_window().first, b.dst_window().second})},
                             {"steps", std::move(steps)}});
    }
  }
  Json speech = Json::array();
  for (const auto& [a, b] : edl.speech_ranges) speech.push_back(Json::array({a, b}));
  return Json{{"format", "vmgraph.edl"},
              {"version", kVersion},
              {"fps", edl.fps},
              {"total_frames", edl.total_frames},
              {"blend_k", edl.blend_k},
              {"slots_per_transition", 2 * edl.blend_k + 1},
              {"provenance", {{"graph_sha256", edl.graph_sha256}, {"seed", edl.seed}}},
              {"speech_ranges", std::move(speech)},
              {"entries", std::move(entries)}};
}

EditDecisionList edl_from_json(const Json& doc) {
  expect_format(doc, "vmgraph.edl");
  EditDecisionList edl;
  edl.fps = as<double>(field(doc, "fps"), "fps");
  edl.total_frames = as<std::size_t>(field(doc, "total_frames"), "total_frames");
  edl.blend_k = as<int>(field(doc, "blend_k"), "blend_k");
  const Json& prov = field(doc, "provenance");
  edl.graph_sha256 = as<std::string>(field(prov, "graph_sha256"), "graph_sha256");
  edl.seed = as<std::uint64_t>(field(prov, "seed"), "seed");
  for (const Json& r : field(doc, "speech_ranges")) {
    const auto range = as<std::vector<std::size_t>>(r, "speech_ranges");
    if (range.size() != 2) throw ParseError("speech range must have 2 entries", 0);
    edl.speech_ranges.emplace_back(range[0], range[1]);
  }
  for (const Json& e : field(doc, "entries")) {
    const auto type = as<std::string>(field(e, "type"), "type");
    if (type == "run") {
      RunEntry run;
      run.output_start = as<std::size_t>(field(e, "output_start"), "output_start");
      run.speed_factor = as<double>(field(e, "speed_factor"), "speed_factor");
      run.source_frames = as<std::vector<std::size_t>>(field(e, "source_frames"), "source_frames");
      run.source_positions = as<std::vector<double>>(field(e, "source_positions"), "source_positions");
      if (run.source_positions.size() != run.source_frames.size()) {
        throw ParseError("run positions and frames differ in length", 0);
      }
      edl.entries.emplace_back(std::move(run));
    } else if (type == "transition") {
      BlendSchedule b;
      b.output_start = as<std::size_t>(field(e, "output_start"), "output_start");
      b.from_frame = as<std::size_t>(field(e, "from_frame"), "from_frame");
      b.to_frame = as<std::size_t>(field(e, "to_frame"), "to_frame");
      b.k = as<int>(field(e, "k"), "k");
      const Json& steps = field(e, "steps");
      for (std::size_t i = 0; i < steps.size(); ++i) {
        BlendStep s;
        s.alpha = as<double>(field(steps[i], "alpha"), "alpha");
        s.src_frame = as<std::size_t>(field(steps[i], "src_frame"), "src_frame");
        s.dst_frame = as<std::size_t>(field(steps[i], "dst_frame"), "dst_frame");
        s.pose = pose_from_json(steps[i], s.alpha == 1.0 ? s.dst_frame : s.src_frame);
        b.steps.push_back(std::move(s));
      }
      edl.entries.emplace_back(std::move(b));
    } else {
      throw ParseError("unknown EDL entry type '" + type + "'", 0);
    }
  }
  return edl;
}

std::string sha256_hex(std::span<const unsigned char> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": malformed JSON", e.byte);
  }
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  const std::string text = dump_json(doc);
  write_file_atomic(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

}  // namespace vmg
