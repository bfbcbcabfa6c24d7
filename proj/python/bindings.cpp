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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "vmgraph/error.hpp"
#include "vmgraph/fixture.hpp"
#include "vmgraph/formats.hpp"
#include "vmgraph/pipeline.hpp"
#include "vmgraph/reenact_assembly.hpp"

namespace py = pybind11;
using namespace vmg;

namespace {

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed JSON", e.byte);
  }
}

std::string dump(const Json& doc) { return doc.dump(); }

SilhouetteMask to_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw ValidationError("mask must be a 2-D array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  SilhouetteMask mask(w, h);
  auto r = a.unchecked<2>();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (r(y, x)) mask.set(x, y);
    }
  }
  return mask;
}

py::array_t<bool> from_mask(const SilhouetteMask& mask) {
  py::array_t<bool> out({mask.height(), mask.width()});
  auto w = out.mutable_unchecked<2>();
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) w(y, x) = mask.get(x, y);
  }
  return out;
}

py::bytes to_bytes(const std::vector<unsigned char>& v) {
  return {reinterpret_cast<const char*>(v.data()), v.size()};
}

std::vector<unsigned char> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

BeamConfig beam_config(std::uint64_t seed, std::size_t beam_width, double low, double high,
                       double duration_weight, int blend_k, bool dedup) {
  BeamConfig c;
  c.seed = seed;
  c.beam_width = beam_width;
  c.window_low = low;
  c.window_high = high;
  c.duration_weight = duration_weight;
  c.blend_margin = blend_k;
  c.deduplicate = dedup;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of vmgraph";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SegmentUnreachableError>(m, "SegmentUnreachableError", PyExc_RuntimeError);
  py::register_exception<AssemblyError>(m, "AssemblyError", PyExc_RuntimeError);

  py::class_<VideoMotionGraph>(m, "Graph")
      .def_property_readonly("node_count", &VideoMotionGraph::node_count)
      .def_property_readonly("edge_count", &VideoMotionGraph::edge_count)
      .def_property_readonly("synthetic_edge_count", &VideoMotionGraph::synthetic_edge_count)
      .def_property_readonly("tau_feat", [](const VideoMotionGraph& g) { return g.thresholds().tau_feat; })
      .def_property_readonly("tau_img", [](const VideoMotionGraph& g) { return g.thresholds().tau_img; })
      .def("out_edges",
           [](const VideoMotionGraph& g, std::size_t src) {
             if (src >= g.node_count()) throw py::index_error("node out of range");
             py::list out;
             for (const GraphEdge& e : g.out_edges(src)) {
               out.append(py::make_tuple(e.dst, e.kind == EdgeKind::kSynthetic, e.d_feat, e.d_img));
             }
             return out;
           })
      .def("to_bytes", [](const VideoMotionGraph& g) { return to_bytes(save_graph(g)); })
      .def_static("from_bytes", [](const py::bytes& b) { return load_graph(from_bytes(b)); })
      .def("__eq__", [](const VideoMotionGraph& a, const VideoMotionGraph& b) { return a == b; });

  m.def("write_fixture", [](const std::string& dir, std::size_t reference_frames,
                            std::size_t target_frames, std::uint64_t seed) {
    FixtureConfig c;
    c.reference_frames = reference_frames;
    c.target_frames = target_frames;
    c.seed = seed;
    write_fixture(dir, c);
  }, py::arg("dir"), py::arg("reference_frames") = 2000, py::arg("target_frames") = 450,
        py::arg("seed") = 1);

  m.def("metronome", [](double rate, double duration, int sample_rate, double amplitude) {
    return metronome(rate, duration, sample_rate, amplitude).samples;
  }, py::arg("clicks_per_second"), py::arg("duration"), py::arg("sample_rate") = 16000,
        py::arg("amplitude") = 0.5);

  m.def("detect_onsets", [](const std::vector<double>& samples, int sample_rate, double fps,
                            double delta) {
    OnsetConfig c;
    c.delta = delta;
    return detect_onsets(samples, sample_rate, fps, c).activated_frames();
  }, py::arg("samples"), py::arg("sample_rate"), py::arg("fps") = 30.0, py::arg("delta") = 0.1);

  m.def("image_distance", [](const py::array_t<bool, py::array::c_style | py::array::forcecast>& a,
                             const py::array_t<bool, py::array::c_style | py::array::forcecast>& b) {
    return image_distance(to_mask(a), to_mask(b));
  });

  m.def("forward_kinematics", [](const std::string& pose_track, std::size_t frame) {
    const PoseTrack t = pose_track_from_json(parse(pose_track));
    if (frame >= t.sequence.size()) throw py::index_error("frame out of range");
    std::vector<std::vector<double>> out;
    for (const Vec3& p : forward_kinematics(t.skeleton, t.sequence[frame])) out.push_back({p.x(), p.y(), p.z()});
    return out;
  });

  m.def("rasterize", [](const std::string& pose_track, std::size_t frame) {
    const PoseTrack t = pose_track_from_json(parse(pose_track));
    if (frame >= t.sequence.size()) throw py::index_error("frame out of range");
    return from_mask(rasterize_silhouette(t.skeleton, forward_kinematics(t.skeleton, t.sequence[frame]),
                                          t.camera));
  });

  m.def("analyze_audio", [](const std::string& wav_path, const std::string& transcript, double fps) {
    const AudioClip clip = read_wav(wav_path);
    std::vector<TranscriptWord> words;
    if (!transcript.empty()) words = transcript_from_json(parse(transcript));
    const AudioFeatureTrack track = analyze_audio(clip, words, KeywordDictionary::standard(), fps);
    const SegmentList segments = segment_target(track);
    return dump(features_to_json(track, &segments));
  }, py::arg("wav_path"), py::arg("transcript") = "", py::arg("fps") = 30.0);

  m.def("build_graph", [](const std::string& pose_track, const std::string& features, int offset_l,
                          int min_jump, double velocity_weight) {
    GraphBuildOptions o;
    o.min_jump = min_jump;
    o.velocity_weight = velocity_weight;
    const PoseTrack t = pose_track_from_json(parse(pose_track));
    const AudioFeatureTrack f = features_from_json(parse(features));
    py::gil_scoped_release release;
    return build_reference_graph(t, f, offset_l, o);
  }, py::arg("pose_track"), py::arg("features"), py::arg("threshold_offset") = 4,
        py::arg("min_jump") = 2, py::arg("velocity_weight") = 1.0);

  m.def("search", [](const VideoMotionGraph& graph, const std::string& features, std::uint64_t seed,
                     std::size_t beam_width, double low, double high, double duration_weight,
                     int blend_k, bool dedup) {
    SearchDocument doc;
    doc.segments = segments_from_features_json(parse(features));
    doc.config = beam_config(seed, beam_width, low, high, duration_weight, blend_k, dedup);
    doc.graph_sha256 = sha256_hex(save_graph(graph));
    {
      py::gil_scoped_release release;
      doc.result = beam_search(graph, doc.segments, doc.config);
    }
    return dump(search_to_json(doc));
  }, py::arg("graph"), py::arg("features"), py::arg("seed") = 0, py::arg("beam_width") = 20,
        py::arg("window_low") = 0.9, py::arg("window_high") = 1.1, py::arg("duration_weight") = 1.0,
        py::arg("blend_k") = 4, py::arg("dedup") = false);

  m.def("assemble", [](const std::string& search_doc, const VideoMotionGraph& graph,
                       const std::string& pose_track, int blend_k, std::size_t path_index) {
    const SearchDocument doc = search_from_json(parse(search_doc));
    if (path_index >= doc.result.paths.size()) throw py::index_error("path index out of range");
    const PoseTrack t = pose_track_from_json(parse(pose_track));
    AssemblyOptions o;
    o.blend_k = blend_k;
    o.window = doc.config;
    o.graph_sha256 = doc.graph_sha256;
    o.seed = doc.config.seed;
    return dump(edl_to_json(assemble_edl(doc.result.paths[path_index], graph, doc.segments,
                                         t.sequence, o)));
  }, py::arg("search"), py::arg("graph"), py::arg("pose_track"), py::arg("blend_k") = 4,
        py::arg("path_index") = 0);

  m.def("blend_alphas", [](int k) {
    MotionSequence seq(30.0, std::vector<PoseFrame>(static_cast<std::size_t>(4 * k + 2),
                                                    PoseFrame{0, Vec3::Zero(), {Vec3::Zero()}}),
                       true);
    std::vector<double> out;
    for (const BlendStep& s : make_blend_schedule(seq, static_cast<std::size_t>(k),
                                                  static_cast<std::size_t>(2 * k + 1), k).steps) {
      out.push_back(s.alpha);
    }
    return out;
  }, py::arg("k"));
}
