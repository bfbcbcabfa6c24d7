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

#include "vmgraph/reenact_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>

#include "vmgraph/error.hpp"

namespace vmg {
namespace {

struct Slot {
  std::size_t source_frame;
  double source_position;
  double speed;
  std::size_t path_index;
};

std::string transition_name(std::size_t m, std::size_t n) {
  return "transition " + std::to_string(m) + "->" + std::to_string(n);
}

struct Rgb {
  unsigned char r, g, b;
};

constexpr Rgb kBackground{16, 16, 16};
constexpr Rgb kBone{230, 230, 230};
constexpr Rgb kJoint{220, 70, 40};

void paint_segment(Image& img, const Eigen::Vector2d& a, const Eigen::Vector2d& b, double radius,
                   Rgb color) {
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - radius)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - radius)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + radius)));
  const Eigen::Vector2d axis = b - a;
  const double len_sq = axis.squaredNorm();
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Eigen::Vector2d q(x + 0.5, y + 0.5);
      const double t = len_sq > 0.0 ? std::clamp((q - a).dot(axis) / len_sq, 0.0, 1.0) : 0.0;
      if ((q - (a + t * axis)).squaredNorm() <= radius * radius) {
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) +
                                   static_cast<std::size_t>(x));
        img.rgb[i] = color.r;
        img.rgb[i + 1] = color.g;
        img.rgb[i + 2] = color.b;
      }
    }
  }
}

}  // namespace

std::size_t BlendSchedule::blended_frame_count() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const BlendStep& s) { return s.alpha > 0.0; }));
}

std::size_t EditDecisionList::transition_count() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const EdlEntry& e) {
    return std::holds_alternative<BlendSchedule>(e);
  }));
}

BlendSchedule make_blend_schedule(const MotionSequence& sequence, std::size_t from_frame,
                                  std::size_t to_frame, int k, std::size_t output_start) {
  if (k < 1) throw AssemblyError("blend neighborhood k must be at least 1");
  const auto kk = static_cast<std::size_t>(k);
  if (from_frame < kk || from_frame >= sequence.size() || to_frame + kk >= sequence.size()) {
    throw AssemblyError(transition_name(from_frame, to_frame) +
                        ": blend windows leave the reference sequence");
  }
  BlendSchedule schedule;
  schedule.from_frame = from_frame;
  schedule.to_frame = to_frame;
  schedule.k = k;
  schedule.output_start = output_start;
  const std::size_t steps = 2 * kk;
  for (std::size_t s = 0; s <= steps; ++s) {
    BlendStep step;
    step.alpha = static_cast<double>(s) / static_cast<double>(steps);
    step.src_frame = from_frame - kk + std::min(s, kk);
    step.dst_frame = to_frame + (s > kk ? s - kk : 0);
    step.pose = interpolate_pose(sequence[step.src_frame], sequence[step.dst_frame], step.alpha);
    schedule.steps.push_back(std::move(step));
  }
  return schedule;
}

EditDecisionList assemble_edl(const PathCandidate& path, const VideoMotionGraph& graph,
                              const SegmentList& segments, const MotionSequence& sequence,
                              const AssemblyOptions& options) {
  segments.validate();
  if (options.blend_k < 1) throw AssemblyError("blend neighborhood k must be at least 1");
  if (path.nodes.empty()) throw AssemblyError("path has no nodes");
  if (path.segment_boundaries.size() != segments.segment_count() + 1 ||
      path.segment_boundaries.front() != 0 ||
      path.segment_boundaries.back() != path.nodes.size() - 1) {
    throw AssemblyError("path boundaries do not match the target segments");
  }
  if (graph.node_count() != sequence.size()) {
    throw AssemblyError("graph has " + std::to_string(graph.node_count()) +
                        " nodes but the pose track has " + std::to_string(sequence.size()) +
                        " frames");
  }
  const auto k = static_cast<std::size_t>(options.blend_k);
  const auto& nodes = path.nodes;

  std::vector<Slot> slots;
  slots.reserve(segments.total_frames);
  slots.push_back({nodes[0], static_cast<double>(nodes[0]), 1.0, 0});
  for (std::size_t s = 0; s < segments.segment_count(); ++s) {
    const std::size_t b0 = path.segment_boundaries[s];
    const std::size_t b1 = path.segment_boundaries[s + 1];
    if (b1 <= b0) throw AssemblyError("segment boundaries must increase");
    const std::span<const std::size_t> run(nodes.data() + b0 + 1, b1 - b0);
    ResampledRun rs;
    try {
      rs = resample_segment(run, segments.length(s), options.window);
    } catch (const ValidationError& e) {
      throw AssemblyError("segment " + std::to_string(s) + ": " + e.what());
    }
    for (std::size_t i = 0; i < rs.source_frames.size(); ++i) {
      const double pos = rs.positions[i];
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const double frac = pos - static_cast<double>(lo);
      double source_pos = static_cast<double>(rs.source_frames[i]);
      if (frac > 0.0 && lo + 1 < run.size() && run[lo + 1] == run[lo] + 1) {
        source_pos = static_cast<double>(run[lo]) + frac;
      }
      slots.push_back({rs.source_frames[i], source_pos, rs.speed_factor,
                       b0 + 1 + static_cast<std::size_t>(std::llround(pos))});
    }
  }
  if (slots.size() != segments.total_frames) {
    throw AssemblyError("assembled " + std::to_string(slots.size()) + " frames for a " +
                        std::to_string(segments.total_frames) + "-frame target");
  }

  // Blend windows in output slots, in path order.
  std::vector<BlendSchedule> schedules;
  std::optional<std::size_t> last_window_end;
  std::size_t slot_cursor = 0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const GraphEdge* e = graph.find_edge(nodes[i], nodes[i + 1]);
    if (!e) {
      throw AssemblyError("step " + std::to_string(nodes[i]) + "->" + std::to_string(nodes[i + 1]) +
                          " is not a graph edge");
    }
    if (e->kind != EdgeKind::kSynthetic) continue;
    const std::size_t m = nodes[i];
    const std::size_t n = nodes[i + 1];
    bool room = i >= k && i + 1 + k < nodes.size();
    for (std::size_t j = 1; room && j <= k; ++j) {
      room = nodes[i - j] + j == m && nodes[i + 1 + j] == n + j;
    }
    if (!room) {
      throw AssemblyError(transition_name(m, n) + " at path position " + std::to_string(i) +
                          " needs " + std::to_string(k + 1) +
                          " natural frames on each side to host its blend window");
    }
    while (slot_cursor + 1 < slots.size() && slots[slot_cursor + 1].path_index <= i) ++slot_cursor;
    const std::size_t center = slot_cursor;
    if (center < k || center + k >= slots.size()) {
      throw AssemblyError(transition_name(m, n) + ": blend window leaves the output timeline");
    }
    if (last_window_end && center - k <= *last_window_end) {
      throw AssemblyError(transition_name(m, n) + ": blend window overlaps the previous transition");
    }
    last_window_end = center + k;
    schedules.push_back(make_blend_schedule(sequence, m, n, options.blend_k, center - k));
  }

  EditDecisionList edl;
  edl.fps = sequence.fps();
  edl.total_frames = slots.size();
  edl.blend_k = options.blend_k;
  edl.graph_sha256 = options.graph_sha256;
  edl.seed = options.seed;

  std::size_t next_schedule = 0;
  std::optional<RunEntry> run;
  auto flush = [&] {
    if (run) {
      edl.entries.emplace_back(std::move(*run));
      run.reset();
    }
  };
  for (std::size_t o = 0; o < slots.size();) {
    if (next_schedule < schedules.size() && schedules[next_schedule].output_start == o) {
      flush();
      const std::size_t len = schedules[next_schedule].slot_count();
      edl.entries.emplace_back(std::move(schedules[next_schedule]));
      ++next_schedule;
      o += len;
      continue;
    }
    const Slot& slot = slots[o];
    if (run && run->speed_factor != slot.speed) flush();
    if (!run) {
      run.emplace();
      run->output_start = o;
      run->speed_factor = slot.speed;
    }
    run->source_frames.push_back(slot.source_frame);
    run->source_positions.push_back(slot.source_position);
    ++o;
  }
  flush();

  if (!options.speech.empty()) {
    if (options.speech.size() != edl.total_frames) {
      throw AssemblyError("speech mask has " + std::to_string(options.speech.size()) +
                          " frames for a " + std::to_string(edl.total_frames) + "-frame target");
    }
    for (std::size_t o = 0; o < options.speech.size();) {
      if (!options.speech[o]) {
        ++o;
        continue;
      }
      std::size_t end = o;
      while (end < options.speech.size() && options.speech[end]) ++end;
      edl.speech_ranges.emplace_back(o, end);
      o = end;
    }
  }
  return edl;
}

std::vector<PoseFrame> edl_poses(const EditDecisionList& edl, const MotionSequence& sequence) {
  std::vector<PoseFrame> poses;
  poses.reserve(edl.total_frames);
  for (const EdlEntry& entry : edl.entries) {
    if (const auto* run = std::get_if<RunEntry>(&entry)) {
      for (std::size_t f : run->source_frames) {
        if (f >= sequence.size()) {
          throw AssemblyError("EDL references missing source frame " + std::to_string(f));
        }
        poses.push_back(sequence[f]);
      }
    } else {
      for (const BlendStep& step : std::get<BlendSchedule>(entry).steps) {
        if (step.src_frame >= sequence.size() || step.dst_frame >= sequence.size()) {
          throw AssemblyError("EDL blend references a missing source frame");
        }
        poses.push_back(step.pose);
      }
    }
  }
  if (poses.size() != edl.total_frames) {
    throw AssemblyError("EDL entries cover " + std::to_string(poses.size()) + " of " +
                        std::to_string(edl.total_frames) + " frames");
  }
  return poses;
}

Image render_pose(const Skeleton& skeleton, const PoseFrame& pose, const RenderConfig& config) {
  const CameraModel& cam = config.camera;
  cam.validate();
  Image img{cam.width, cam.height, {}};
  img.rgb.resize(3 * static_cast<std::size_t>(cam.width) * static_cast<std::size_t>(cam.height));
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = kBackground.r;
    img.rgb[i + 1] = kBackground.g;
    img.rgb[i + 2] = kBackground.b;
  }
  const std::vector<Vec3> world = forward_kinematics(skeleton, pose);
  std::vector<std::optional<Eigen::Vector2d>> px(world.size());
  for (std::size_t j = 0; j < world.size(); ++j) {
    const Vec3 c = cam.to_camera(world[j]);
    if (c.z() < kNearPlane) continue;
    px[j] = Eigen::Vector2d(cam.focal_length * c.x() / c.z() + cam.principal_point.x(),
                            cam.focal_length * c.y() / c.z() + cam.principal_point.y());
  }
  const double stroke = std::max(0, config.stroke_radius);
  for (std::size_t j = 0; j < skeleton.size(); ++j) {
    const auto parent = skeleton[j].parent;
    if (parent && px[j] && px[*parent]) paint_segment(img, *px[*parent], *px[j], stroke, kBone);
  }
  for (std::size_t j = 0; j < skeleton.size(); ++j) {
    if (px[j]) paint_segment(img, *px[j], *px[j], stroke + 1.0, kJoint);
  }
  return img;
}

std::vector<Image> render_preview(const EditDecisionList& edl, const Skeleton& skeleton,
                                  const MotionSequence& sequence, const RenderConfig& config) {
  std::vector<Image> images;
  for (const PoseFrame& pose : edl_poses(edl, sequence)) {
    images.push_back(render_pose(skeleton, pose, config));
  }
  return images;
}

std::vector<unsigned char> encode_ppm(const Image& image) {
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.insert(out.end(), image.rgb.begin(), image.rgb.end());
  return out;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  const auto bytes = encode_ppm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace vmg
