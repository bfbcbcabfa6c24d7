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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace vmg {

using Vec3 = Eigen::Vector3d;

struct Joint {
  std::string name;
  std::optional<std::size_t> parent;  // empty for the root
  Vec3 rest_offset = Vec3::Zero();    // meters, in the parent frame
  double capsule_radius = 0.05;       // meters
};

/// Joint hierarchy with one capsule per joint. Joints are stored in
/// topological order: the root comes first and every parent precedes its
/// children.
class Skeleton {
 public:
  Skeleton() = default;

  /// Throws ValidationError unless there is exactly one root, parents precede
  /// children, radii are positive and offsets finite.
  explicit Skeleton(std::vector<Joint> joints);

  std::size_t size() const noexcept { return joints_.size(); }
  bool empty() const noexcept { return joints_.empty(); }
  const std::vector<Joint>& joints() const noexcept { return joints_; }
  const Joint& operator[](std::size_t i) const { return joints_[i]; }

  std::optional<std::size_t> find(const std::string& name) const;

 private:
  std::vector<Joint> joints_;
};

/// One captured frame. `joint_rotations` holds a local axis-angle vector per
/// joint (radians); the blend arithmetic operates on these directly.
struct PoseFrame {
  std::size_t frame_index = 0;
  Vec3 root_translation = Vec3::Zero();
  std::vector<Vec3> joint_rotations;

  friend bool operator==(const PoseFrame&, const PoseFrame&) = default;
};

/// World-space joint positions and their per-frame velocities (meters/frame).
struct JointState {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
};

class MotionSequence {
 public:
  MotionSequence() = default;

  /// Frame indices are renumbered 0..n-1 when `renumber` is set; otherwise
  /// they must already be consecutive from zero.
  MotionSequence(double fps, std::vector<PoseFrame> frames, bool renumber = false);

  double fps() const noexcept { return fps_; }
  std::size_t size() const noexcept { return frames_.size(); }
  bool empty() const noexcept { return frames_.empty(); }
  const std::vector<PoseFrame>& frames() const noexcept { return frames_; }
  const PoseFrame& operator[](std::size_t i) const { return frames_[i]; }

 private:
  double fps_ = 30.0;
  std::vector<PoseFrame> frames_;
};

/// Checks lengths and finiteness of `pose` against `skeleton`.
void validate_pose(const Skeleton& skeleton, const PoseFrame& pose);

/// World positions of every joint. Joint i sits at its parent's world
/// transform applied to its rest offset; the root sits at
/// root_translation + rest_offset. Rotations compose parent to child.
std::vector<Vec3> forward_kinematics(const Skeleton& skeleton, const PoseFrame& pose);

/// Positions by forward kinematics and velocities by central differences
/// (one-sided at the first and last frame, zero for a single frame).
std::vector<JointState> compute_joint_states(const Skeleton& skeleton,
                                             const MotionSequence& sequence);

/// sqrt(sum |dp|^2) + velocity_weight * sqrt(sum |dv|^2) over all joints.
double pose_distance(const JointState& a, const JointState& b, double velocity_weight = 1.0);

/// Component-wise (1 - alpha) * a + alpha * b over rotations and root
/// translation. alpha = 0 and alpha = 1 return the endpoints unchanged.
PoseFrame interpolate_pose(const PoseFrame& a, const PoseFrame& b, double alpha);

}  // namespace vmg
