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

// vmgraph: build a motion graph from a reference performance and reenact it
// against new speech audio.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "vmgraph/error.hpp"
#include "vmgraph/fixture.hpp"
#include "vmgraph/formats.hpp"
#include "vmgraph/pipeline.hpp"
#include "vmgraph/reenact_assembly.hpp"

namespace fs = std::filesystem;
using namespace vmg;

namespace {

constexpr int kStageFailure = 1;
constexpr int kUsageError = 2;

struct StageFailure : std::runtime_error {
  StageFailure(std::string stage, const std::string& message)
      : std::runtime_error(message), stage(std::move(stage)) {}
  std::string stage;
};

struct UsageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what());
  }
}

std::span<const unsigned char> as_bytes(const std::string& s) {
  return {reinterpret_cast<const unsigned char*>(s.data()), s.size()};
}

std::optional<std::pair<double, double>> parse_window(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return std::nullopt;
  double lo = 0.0;
  double hi = 0.0;
  try {
    std::size_t used = 0;
    lo = std::stod(text.substr(0, comma), &used);
    if (used != comma) return std::nullopt;
    const std::string rest = text.substr(comma + 1);
    hi = std::stod(rest, &used);
    if (used != rest.size()) return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (!(lo > 0.0) || !(lo <= 1.0) || !(hi >= 1.0) || !std::isfinite(hi)) return std::nullopt;
  return std::pair{lo, hi};
}

const CLI::Validator kWindow(
    [](std::string& text) -> std::string {
      return parse_window(text) ? std::string{} : "expected LOW,HIGH with 0 < LOW <= 1 <= HIGH";
    },
    "LOW,HIGH");

// ---- options ---------------------------------------------------------------

struct AudioOptions {
  double fps = 30.0;
  double onset_delta = 0.1;
  std::string dictionary;
};

struct GraphOptions {
  int threshold_offset = 4;
  int min_jump = 2;
  double velocity_weight = 1.0;
};

struct SearchOptions {
  std::uint64_t seed = 0;
  std::size_t beam_width = 20;
  std::string window = "0.9,1.1";
  double duration_weight = 1.0;
  int blend_k = 4;
  std::vector<std::size_t> start_frames;
  bool dedup = false;
  bool allow_interior_onsets = false;
};

void add_audio_options(CLI::App* cmd, AudioOptions& o) {
  cmd->add_option("--fps", o.fps, "Video frame rate")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--onset-delta", o.onset_delta, "Onset threshold above the local mean")
      ->capture_default_str();
  cmd->add_option("--dictionary", o.dictionary, "Keyword dictionary JSON (default: built-in)")
      ->check(CLI::ExistingFile);
}

void add_graph_options(CLI::App* cmd, GraphOptions& o) {
  cmd->add_option("--threshold-offset", o.threshold_offset, "Frame offset l for the thresholds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--min-jump", o.min_jump, "Smallest frame gap of a synthetic edge")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--velocity-weight", o.velocity_weight, "Weight of velocities in d_feat")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
}

void add_search_options(CLI::App* cmd, SearchOptions& o) {
  cmd->add_option("--seed", o.seed, "Seed for the random start frames")->capture_default_str();
  cmd->add_option("--beam-width", o.beam_width, "Paths kept per segment")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--duration-window", o.window, "Accepted L'/L band")
      ->capture_default_str()
      ->check(kWindow);
  cmd->add_option("--duration-weight", o.duration_weight, "Weight of the duration cost")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--blend-k", o.blend_k, "Blend neighborhood; 0 disables blend margins")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--start-frame", o.start_frames, "Pin a start frame (repeatable)");
  cmd->add_flag("--dedup", o.dedup, "Drop paths with identical node sequences");
  cmd->add_flag("--allow-interior-onsets", o.allow_interior_onsets,
                "Let segments pass through onset frames");
}

BeamConfig beam_config(const SearchOptions& o) {
  BeamConfig c;
  c.seed = o.seed;
  c.beam_width = o.beam_width;
  const auto window = parse_window(o.window);
  c.window_low = window->first;
  c.window_high = window->second;
  c.duration_weight = o.duration_weight;
  c.blend_margin = o.blend_k;
  c.start_frames = o.start_frames;
  c.deduplicate = o.dedup;
  c.onset_free_interior = !o.allow_interior_onsets;
  return c;
}

// ---- stages ----------------------------------------------------------------

Json analyze_stage(const fs::path& audio, const std::optional<fs::path>& transcript,
                   const AudioOptions& o, std::optional<std::size_t> frames) {
  return stage("analyze-audio", [&] {
    const AudioClip clip = read_wav(audio);
    std::vector<TranscriptWord> words;
    if (transcript) words = transcript_from_json(read_json_file(*transcript));
    const KeywordDictionary dict = o.dictionary.empty()
                                       ? KeywordDictionary::standard()
                                       : dictionary_from_json(read_json_file(o.dictionary));
    OnsetConfig onsets;
    onsets.delta = o.onset_delta;
    const AudioFeatureTrack track = analyze_audio(clip, words, dict, o.fps, onsets, frames);
    const SegmentList segments = segment_target(track);
    std::size_t onset_count = 0;
    for (const FrameFeature& f : track.frames) onset_count += f.onset ? 1 : 0;
    std::cout << "analyze-audio: " << track.size() << " frames, " << onset_count << " onsets, "
              << segments.segment_count() << " segments\n";
    return features_to_json(track, &segments);
  });
}

std::vector<unsigned char> build_graph_stage(const PoseTrack& track, const Json& features,
                                             const GraphOptions& o) {
  return stage("build-graph", [&] {
    GraphBuildOptions options;
    options.min_jump = o.min_jump;
    options.velocity_weight = o.velocity_weight;
    const VideoMotionGraph graph =
        build_reference_graph(track, features_from_json(features), o.threshold_offset, options);
    std::cout << "build-graph: " << graph.node_count() << " nodes, " << graph.edge_count()
              << " edges (" << graph.synthetic_edge_count() << " synthetic)\n";
    return save_graph(graph);
  });
}

Json search_stage(const std::vector<unsigned char>& graph_bytes, const Json& features,
                  const SearchOptions& o) {
  return stage("search", [&] {
    const VideoMotionGraph graph = load_graph(graph_bytes);
    SearchDocument doc;
    doc.segments = segments_from_features_json(features);
    doc.config = beam_config(o);
    doc.graph_sha256 = sha256_hex(graph_bytes);
    doc.result = beam_search(graph, doc.segments, doc.config);
    if (doc.result.empty()) {
      throw SegmentUnreachableError(doc.result.unreachable_segment.value_or(0));
    }
    std::cout << "search: " << doc.result.paths.size() << " paths, best cost "
              << doc.result.best().total_cost() << "\n";
    return search_to_json(doc);
  });
}

Json assemble_stage(const Json& path_doc, const std::vector<unsigned char>& graph_bytes,
                    const PoseTrack& track, const std::optional<Json>& features, int blend_k,
                    std::size_t path_index) {
  return stage("assemble", [&] {
    const SearchDocument doc = search_from_json(path_doc);
    const std::string sha = sha256_hex(graph_bytes);
    if (doc.graph_sha256 != sha) {
      throw AssemblyError("path file was searched on a different graph");
    }
    if (path_index >= doc.result.paths.size()) {
      throw AssemblyError("path index " + std::to_string(path_index) + " out of range (" +
                          std::to_string(doc.result.paths.size()) + " paths)");
    }
    const VideoMotionGraph graph = load_graph(graph_bytes);
    AssemblyOptions options;
    options.blend_k = blend_k;
    options.window = doc.config;
    options.graph_sha256 = sha;
    options.seed = doc.config.seed;
    if (features) {
      for (const FrameFeature& f : features_from_json(*features).frames) {
        options.speech.push_back(f.speech);
      }
    }
    const EditDecisionList edl =
        assemble_edl(doc.result.paths[path_index], graph, doc.segments, track.sequence, options);
    std::cout << "assemble: " << edl.total_frames << " output frames, " << edl.transition_count()
              << " transitions\n";
    return edl_to_json(edl);
  });
}

void preview_stage(const Json& edl_doc, const PoseTrack& track, const fs::path& out_dir,
                   int stroke_radius) {
  stage("preview", [&] {
    const EditDecisionList edl = edl_from_json(edl_doc);
    RenderConfig config;
    config.camera = track.camera;
    config.stroke_radius = stroke_radius;
    config.output_dir = out_dir;
    const std::vector<Image> images = render_preview(edl, track.skeleton, track.sequence, config);
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < images.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%05zu.ppm", i);
      write_file_atomic(out_dir / name, encode_ppm(images[i]));
    }
    std::cout << "preview: " << images.size() << " images in " << out_dir.string() << "\n";
    return 0;
  });
}

PoseTrack load_pose(const fs::path& path) {
  return stage("load-pose", [&] { return pose_track_from_json(read_json_file(path)); });
}

Json load_json(const char* name, const fs::path& path) {
  return stage(name, [&] { return read_json_file(path); });
}

std::vector<unsigned char> load_bytes(const char* name, const fs::path& path) {
  return stage(name, [&] { return read_file(path); });
}

void save_json(const char* name, const fs::path& path, const Json& doc) {
  stage(name, [&] {
    write_json_file(path, doc);
    return 0;
  });
}

void save_bytes(const char* name, const fs::path& path, std::span<const unsigned char> bytes) {
  stage(name, [&] {
    write_file_atomic(path, bytes);
    return 0;
  });
}

void require_files(std::initializer_list<fs::path> paths) {
  for (const fs::path& p : paths) {
    if (!fs::is_regular_file(p)) throw UsageFailure("input file not found: " + p.string());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build video motion graphs and reenact gestures for new speech audio."};
  app.name("vmgraph");
  app.require_subcommand(1);

  // make-fixture
  fs::path fixture_out;
  FixtureConfig fixture;
  auto* make_fixture = app.add_subcommand("make-fixture", "Write the synthetic puppet fixture");
  make_fixture->add_option("--out", fixture_out, "Output directory")->required();
  make_fixture->add_option("--reference-frames", fixture.reference_frames)->capture_default_str();
  make_fixture->add_option("--target-frames", fixture.target_frames)->capture_default_str();
  make_fixture->add_option("--fixture-seed", fixture.seed)->capture_default_str();

  // analyze-audio
  fs::path audio_in;
  fs::path transcript_in;
  fs::path analyze_out;
  std::size_t frame_count = 0;
  AudioOptions audio_opts;
  auto* analyze = app.add_subcommand("analyze-audio", "WAV + transcript to features and segments");
  analyze->add_option("--audio", audio_in, "16-bit PCM WAV")->required()->check(CLI::ExistingFile);
  analyze->add_option("--transcript", transcript_in, "Word timings JSON")->check(CLI::ExistingFile);
  analyze->add_option("--frames", frame_count, "Force the track length in frames");
  analyze->add_option("--out", analyze_out, "Features JSON")->required();
  add_audio_options(analyze, audio_opts);

  // build-graph
  fs::path pose_in;
  fs::path features_in;
  fs::path graph_out;
  GraphOptions graph_opts;
  auto* build = app.add_subcommand("build-graph", "Pose track + audio features to a graph file");
  build->add_option("--pose", pose_in, "Pose track JSON")->required()->check(CLI::ExistingFile);
  build->add_option("--features", features_in, "Reference features JSON")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--out", graph_out, "Graph file")->required();
  add_graph_options(build, graph_opts);

  // search
  fs::path graph_in;
  fs::path target_in;
  fs::path path_out;
  SearchOptions search_opts;
  auto* search = app.add_subcommand("search", "Graph + target features to ranked paths");
  search->add_option("--graph", graph_in, "Graph file")->required()->check(CLI::ExistingFile);
  search->add_option("--features", target_in, "Target features JSON")
      ->required()
      ->check(CLI::ExistingFile);
  search->add_option("--out", path_out, "Path JSON")->required();
  add_search_options(search, search_opts);

  // assemble
  fs::path path_in;
  fs::path edl_out;
  fs::path speech_in;
  int assemble_k = 4;
  std::size_t path_index = 0;
  auto* assemble = app.add_subcommand("assemble", "Path to an edit decision list");
  assemble->add_option("--path", path_in, "Path JSON")->required()->check(CLI::ExistingFile);
  assemble->add_option("--graph", graph_in, "Graph file")->required()->check(CLI::ExistingFile);
  assemble->add_option("--pose", pose_in, "Pose track JSON")->required()->check(CLI::ExistingFile);
  assemble->add_option("--features", speech_in, "Target features JSON for speech ranges")
      ->check(CLI::ExistingFile);
  assemble->add_option("--blend-k", assemble_k, "Blend neighborhood")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  assemble->add_option("--path-index", path_index, "Which ranked path to use")->capture_default_str();
  assemble->add_option("--out", edl_out, "EDL JSON")->required();

  // preview
  fs::path edl_in;
  fs::path preview_out;
  int stroke_radius = 2;
  auto* preview = app.add_subcommand("preview", "Render an EDL as skeleton images");
  preview->add_option("--edl", edl_in, "EDL JSON")->required()->check(CLI::ExistingFile);
  preview->add_option("--pose", pose_in, "Pose track JSON")->required()->check(CLI::ExistingFile);
  preview->add_option("--out-dir", preview_out, "Image directory")->required();
  preview->add_option("--stroke-radius", stroke_radius)->capture_default_str()->check(CLI::NonNegativeNumber);

  // run
  fs::path run_fixture;
  fs::path ref_pose;
  fs::path ref_audio;
  fs::path ref_transcript;
  fs::path tgt_audio;
  fs::path tgt_transcript;
  fs::path run_out;
  bool run_preview = false;
  AudioOptions run_audio;
  GraphOptions run_graph;
  SearchOptions run_search;
  auto* run = app.add_subcommand("run", "All stages end to end");
  run->add_option("--fixture", run_fixture, "Directory written by make-fixture")
      ->check(CLI::ExistingDirectory);
  run->add_option("--reference-pose", ref_pose);
  run->add_option("--reference-audio", ref_audio);
  run->add_option("--reference-transcript", ref_transcript);
  run->add_option("--target-audio", tgt_audio);
  run->add_option("--target-transcript", tgt_transcript);
  run->add_option("--out-dir", run_out, "Output directory")->required();
  run->add_flag("--preview", run_preview, "Also render preview images");
  run->add_option("--stroke-radius", stroke_radius)->capture_default_str();
  add_audio_options(run, run_audio);
  add_graph_options(run, run_graph);
  add_search_options(run, run_search);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*make_fixture) {
      stage("make-fixture", [&] {
        write_fixture(fixture_out, fixture);
        return 0;
      });
    } else if (*analyze) {
      std::optional<fs::path> transcript;
      if (!transcript_in.empty()) transcript = transcript_in;
      std::optional<std::size_t> frames;
      if (analyze->count("--frames")) frames = frame_count;
      save_json("write-features", analyze_out, analyze_stage(audio_in, transcript, audio_opts, frames));
    } else if (*build) {
      const PoseTrack track = load_pose(pose_in);
      const Json features = load_json("load-features", features_in);
      save_bytes("write-graph", graph_out, build_graph_stage(track, features, graph_opts));
    } else if (*search) {
      const auto graph = load_bytes("load-graph", graph_in);
      const Json features = load_json("load-features", target_in);
      save_json("write-path", path_out, search_stage(graph, features, search_opts));
    } else if (*assemble) {
      const Json path = load_json("load-path", path_in);
      const auto graph = load_bytes("load-graph", graph_in);
      const PoseTrack track = load_pose(pose_in);
      std::optional<Json> features;
      if (!speech_in.empty()) features = load_json("load-features", speech_in);
      save_json("write-edl", edl_out,
                assemble_stage(path, graph, track, features, assemble_k, path_index));
    } else if (*preview) {
      const Json edl = load_json("load-edl", edl_in);
      preview_stage(edl, load_pose(pose_in), preview_out, stroke_radius);
    } else if (*run) {
      if (!run_fixture.empty()) {
        auto pick = [&](fs::path& p, const char* name) {
          if (p.empty()) p = run_fixture / name;
        };
        pick(ref_pose, "reference_pose.json");
        pick(ref_audio, "reference.wav");
        pick(ref_transcript, "reference_transcript.json");
        pick(tgt_audio, "target.wav");
        pick(tgt_transcript, "target_transcript.json");
      }
      if (ref_pose.empty() || ref_audio.empty() || tgt_audio.empty()) {
        throw UsageFailure("run needs --fixture or --reference-pose, --reference-audio and --target-audio");
      }
      require_files({ref_pose, ref_audio, tgt_audio});
      if (!ref_transcript.empty()) require_files({ref_transcript});
      if (!tgt_transcript.empty()) require_files({tgt_transcript});
      auto optional_path = [](const fs::path& p) {
        return p.empty() ? std::nullopt : std::optional<fs::path>(p);
      };

      // Every stage runs in memory first so a failure leaves no new files.
      const PoseTrack track = load_pose(ref_pose);
      const Json ref_features =
          analyze_stage(ref_audio, optional_path(ref_transcript), run_audio, track.sequence.size());
      const auto graph = build_graph_stage(track, ref_features, run_graph);
      const Json tgt_features = analyze_stage(tgt_audio, optional_path(tgt_transcript), run_audio, {});
      const Json path = search_stage(graph, tgt_features, run_search);
      const int k = run_search.blend_k > 0 ? run_search.blend_k : 4;
      const Json edl = assemble_stage(path, graph, track, tgt_features, k, 0);

      stage("write-outputs", [&] {
        fs::create_directories(run_out);
        return 0;
      });
      save_json("write-outputs", run_out / "reference_features.json", ref_features);
      save_bytes("write-outputs", run_out / "graph.vmg", graph);
      save_json("write-outputs", run_out / "target_features.json", tgt_features);
      save_json("write-outputs", run_out / "path.json", path);
      save_json("write-outputs", run_out / "edl.json", edl);
      if (run_preview) preview_stage(edl, track, run_out / "preview", stroke_radius);
    }
  } catch (const UsageFailure& e) {
    std::cerr << "vmgraph: " << e.what() << "\n";
    return kUsageError;
  } catch (const StageFailure& e) {
    std::cerr << "vmgraph: " << e.stage << " failed: " << e.what() << "\n";
    return kStageFailure;
  }
  return 0;
}
