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

#include "vmgraph/pose_model.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "vmgraph/error.hpp"

namespace vmg {
namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

Eigen::Matrix3d rotation_from_axis_angle(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle == 0.0) {
    return Eigen::Matrix3d::Identity();
  }
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

void check_state(const JointState& s) {
  if (s.positions.size() != s.velocities.size()) {
    throw StructuralError("joint state has " + std::to_string(s.positions.size()) +
                          " positions but " + std::to_string(s.velocities.size()) +
                          " velocities");
  }
}

}  // namespace

Skeleton::Skeleton(std::vector<Joint> joints) : joints_(std::move(joints)) {
  if (joints_.empty()) {
    throw ValidationError("skeleton has no joints");
  }
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const Joint& j = joints_[i];
    if (i == 0) {
      if (j.parent) {
        throw ValidationError("first joint '" + j.name + "' must be the root");
      }
    } else if (!j.parent) {
      throw ValidationError("joint '" + j.name + "' is a second root");
    } else if (*j.parent >= i) {
      throw ValidationError("joint '" + j.name + "' has parent index " +
                            std::to_string(*j.parent) + " not preceding it");
    }
    if (!(j.capsule_radius > 0.0) || !std::isfinite(j.capsule_radius)) {
      throw ValidationError("joint '" + j.name + "' has non-positive capsule radius");
    }
    if (!finite(j.rest_offset)) {
      throw ValidationError("joint '" + j.name + "' has a non-finite rest offset");
    }
  }
}

std::optional<std::size_t> Skeleton::find(const std::string& name) const {
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    if (joints_[i].name == name) return i;
  }
  return std::nullopt;
}

MotionSequence::MotionSequence(double fps, std::vector<PoseFrame> frames, bool renumber)
    : fps_(fps), frames_(std::move(frames)) {
  if (!(fps_ > 0.0) || !std::isfinite(fps_)) {
    throw ValidationError("fps must be positive");
  }
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    if (renumber) {
      frames_[i].frame_index = i;
    } else if (frames_[i].frame_index != i) {
      throw ValidationError("frame " + std::to_string(i) + " carries index " +
                            std::to_string(frames_[i].frame_index));
    }
  }
}

void validate_pose(const Skeleton& skeleton, const PoseFrame& pose) {
  if (pose.joint_rotations.size() != skeleton.size()) {
    throw StructuralError("pose has " + std::to_string(pose.joint_rotations.size()) +
                          " rotations, skeleton has " + std::to_string(skeleton.size()) +
                          " joints");
  }
  if (!finite(pose.root_translation)) {
    throw ValidationError("non-finite root translation in frame " +
                          std::to_string(pose.frame_index));
  }
  for (std::size_t i = 0; i < pose.joint_rotations.size(); ++i) {
    if (!finite(pose.joint_rotations[i])) {
      throw ValidationError("non-finite rotation for joint " + std::to_string(i) +
                            " in frame " + std::to_string(pose.frame_index));
    }
  }
}

std::vector<Vec3> forward_kinematics(const Skeleton& skeleton, const PoseFrame& pose) {
  validate_pose(skeleton, pose);
  const std::size_t n = skeleton.size();
  std::vector<Eigen::Matrix3d> world_rot(n);
  std::vector<Vec3> world_pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Joint& joint = skeleton[i];
    const Eigen::Matrix3d local = rotation_from_axis_angle(pose.joint_rotations[i]);
    if (!joint.parent) {
      world_pos[i] = pose.root_translation + joint.rest_offset;
      world_rot[i] = local;
    } else {
      const std::size_t p = *joint.parent;
      world_pos[i] = world_pos[p] + world_rot[p] * joint.rest_offset;
      world_rot[i] = world_rot[p] * local;
    }
  }
  return world_pos;
}

std::vector<JointState> compute_joint_states(const Skeleton& skeleton,
                                             const MotionSequence& sequence) {
  if (sequence.empty()) {
    throw ValidationError("cannot compute joint states of an empty sequence");
  }
  const std::size_t frames = sequence.size();
  const std::size_t joints = skeleton.size();
  std::vector<JointState> states(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    states[t].positions = forward_kinematics(skeleton, sequence[t]);
    states[t].velocities.assign(joints, Vec3::Zero());
  }
  if (frames == 1) {
    return states;
  }
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t lo = t == 0 ? 0 : t - 1;
    const std::size_t hi = t + 1 == frames ? t : t + 1;
    const double span = static_cast<double>(hi - lo);
    for (std::size_t j = 0; j < joints; ++j) {
      states[t].velocities[j] = (states[hi].positions[j] - states[lo].positions[j]) / span;
    }
  }
  return states;
}

double pose_distance(const JointState& a, const JointState& b, double velocity_weight) {
  check_state(a);
  check_state(b);
  if (a.positions.size() != b.positions.size()) {
    throw StructuralError("pose distance between states with " +
                          std::to_string(a.positions.size()) + " and " +
                          std::to_string(b.positions.size()) + " joints");
  }
  double pos_sq = 0.0;
  double vel_sq = 0.0;
  for (std::size_t j = 0; j < a.positions.size(); ++j) {
    pos_sq += (a.positions[j] - b.positions[j]).squaredNorm();
    vel_sq += (a.velocities[j] - b.velocities[j]).squaredNorm();
  }
  return std::sqrt(pos_sq) + velocity_weight * std::sqrt(vel_sq);
}

PoseFrame interpolate_pose(const PoseFrame& a, const PoseFrame& b, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("blend weight " + std::to_string(alpha) + " outside [0, 1]");
  }
  if (a.joint_rotations.size() != b.joint_rotations.size()) {
    throw StructuralError("cannot blend poses with " + std::to_string(a.joint_rotations.size()) +
                          " and " + std::to_string(b.joint_rotations.size()) + " joints");
  }
  if (alpha == 0.0) return a;
  if (alpha == 1.0) return b;
  PoseFrame out;
  out.frame_index = a.frame_index;
  out.root_translation = (1.0 - alpha) * a.root_translation + alpha * b.root_translation;
  out.joint_rotations.resize(a.joint_rotations.size());
  for (std::size_t j = 0; j < a.joint_rotations.size(); ++j) {
    out.joint_rotations[j] = (1.0 - alpha) * a.joint_rotations[j] + alpha * b.joint_rotations[j];
  }
  return out;
}

}  // namespace vmg
