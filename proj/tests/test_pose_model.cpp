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

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vmgraph/error.hpp"
#include "vmgraph/fixture.hpp"
#include "vmgraph/pose_model.hpp"

using namespace vmg;

namespace {

Skeleton chain2() {
  return Skeleton({{"root", std::nullopt, Vec3::Zero(), 0.1}, {"tip", 0, Vec3(1, 0, 0), 0.1}});
}

PoseFrame rest(const Skeleton& sk, std::size_t index = 0) {
  return {index, Vec3::Zero(), std::vector<Vec3>(sk.size(), Vec3::Zero())};
}

PoseFrame random_pose(const Skeleton& sk, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.6);
  PoseFrame p = rest(sk);
  p.root_translation = Vec3(n(rng), n(rng), n(rng));
  for (Vec3& r : p.joint_rotations) r = Vec3(n(rng), n(rng), n(rng));
  return p;
}

}  // namespace

TEST_CASE("skeleton validation") {
  CHECK_NOTHROW(puppet_skeleton());
  CHECK_THROWS_AS(Skeleton(std::vector<Joint>{}), ValidationError);
  CHECK_THROWS_AS(Skeleton({{"a", 0, Vec3::Zero(), 0.1}}), ValidationError);
  CHECK_THROWS_AS(Skeleton({{"a", std::nullopt, Vec3::Zero(), 0.1}, {"b", std::nullopt, Vec3::Zero(), 0.1}}),
                  ValidationError);
  CHECK_THROWS_AS(Skeleton({{"a", std::nullopt, Vec3::Zero(), 0.1}, {"b", 1, Vec3::Zero(), 0.1}}),
                  ValidationError);
  CHECK_THROWS_AS(Skeleton({{"a", std::nullopt, Vec3::Zero(), 0.0}}), ValidationError);
  CHECK(puppet_skeleton().find("r_elbow") == std::size_t{10});
  CHECK_FALSE(puppet_skeleton().find("tail"));
}

TEST_CASE("pose validation") {
  const Skeleton sk = chain2();
  PoseFrame p = rest(sk);
  CHECK_NOTHROW(validate_pose(sk, p));
  p.joint_rotations.pop_back();
  CHECK_THROWS_AS(validate_pose(sk, p), StructuralError);
  p = rest(sk);
  p.root_translation.x() = std::nan("");
  CHECK_THROWS_AS(validate_pose(sk, p), ValidationError);
}

TEST_CASE("forward kinematics examples") {
  const Skeleton sk = puppet_skeleton();
  SUBCASE("rest pose sums offsets along each chain") {
    const auto pos = forward_kinematics(sk, rest(sk));
    for (std::size_t i = 0; i < sk.size(); ++i) {
      Vec3 sum = Vec3::Zero();
      for (std::optional<std::size_t> j = i; j; j = sk[*j].parent) sum += sk[*j].rest_offset;
      CHECK((pos[i] - sum).norm() < 1e-12);
    }
  }
  SUBCASE("quarter turn about z") {
    PoseFrame p = rest(chain2());
    p.joint_rotations[0] = Vec3(0, 0, std::numbers::pi / 2);
    const auto pos = forward_kinematics(chain2(), p);
    CHECK((pos[1] - Vec3(0, 1, 0)).norm() < 1e-9);
  }
  SUBCASE("root translation shifts every joint") {
    std::mt19937_64 rng(3);
    PoseFrame p = random_pose(sk, rng);
    const auto a = forward_kinematics(sk, p);
    p.root_translation += Vec3(0, 0, 5);
    const auto b = forward_kinematics(sk, p);
    for (std::size_t i = 0; i < sk.size(); ++i) CHECK((b[i] - a[i] - Vec3(0, 0, 5)).norm() < 1e-12);
  }
}

TEST_CASE("forward kinematics agrees with the Rodrigues oracle and is rigid") {
  const Skeleton sk = puppet_skeleton();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const PoseFrame p = random_pose(sk, rng);
    const auto pos = forward_kinematics(sk, p);
    const auto ref = oracle::fk(sk, p);
    CHECK(pos == forward_kinematics(sk, p));
    for (std::size_t i = 0; i < sk.size(); ++i) {
      CHECK((pos[i] - ref[i]).norm() < 1e-12);
      if (sk[i].parent) {
        CHECK(std::abs((pos[i] - pos[*sk[i].parent]).norm() - sk[i].rest_offset.norm()) < 1e-9);
      }
    }
  }
}

TEST_CASE("joint states") {
  const Skeleton sk = chain2();
  SUBCASE("static motion has zero velocity") {
    const MotionSequence seq(30, std::vector<PoseFrame>(10, rest(sk)), true);
    for (const auto& s : compute_joint_states(sk, seq)) {
      for (const Vec3& v : s.velocities) CHECK(v == Vec3::Zero());
    }
  }
  SUBCASE("rigid translation") {
    std::vector<PoseFrame> frames;
    for (std::size_t t = 0; t < 8; ++t) {
      PoseFrame p = rest(sk, t);
      p.root_translation = Vec3(0.1 * t, 0, 0);
      frames.push_back(p);
    }
    for (const auto& s : compute_joint_states(sk, MotionSequence(30, frames))) {
      for (const Vec3& v : s.velocities) CHECK((v - Vec3(0.1, 0, 0)).norm() < 1e-12);
    }
  }
  SUBCASE("sinusoidal swing matches finite differences") {
    std::vector<PoseFrame> frames;
    for (std::size_t t = 0; t < 40; ++t) {
      PoseFrame p = rest(sk, t);
      p.joint_rotations[0] = Vec3(0, 0, 0.8 * std::sin(0.3 * t));
      frames.push_back(p);
    }
    const MotionSequence seq(30, frames);
    const auto states = compute_joint_states(sk, seq);
    std::vector<std::vector<Vec3>> positions;
    for (const auto& f : frames) positions.push_back(oracle::fk(sk, f));
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const auto v = oracle::fd_velocity(positions, t);
      for (std::size_t j = 0; j < sk.size(); ++j) CHECK((states[t].velocities[j] - v[j]).norm() < 1e-9);
    }
  }
  SUBCASE("single frame") {
    const auto s = compute_joint_states(sk, MotionSequence(30, {rest(sk)}));
    CHECK(s[0].velocities[1] == Vec3::Zero());
  }
  CHECK_THROWS_AS(compute_joint_states(sk, MotionSequence()), ValidationError);
}

TEST_CASE("motion sequence indices") {
  const Skeleton sk = chain2();
  CHECK_THROWS_AS(MotionSequence(30, {rest(sk, 1)}), ValidationError);
  CHECK(MotionSequence(30, {rest(sk, 5), rest(sk, 9)}, true)[1].frame_index == 1);
  CHECK_THROWS_AS(MotionSequence(0, {rest(sk)}), ValidationError);
}

TEST_CASE("pose distance") {
  JointState a{{Vec3(0, 0, 0)}, {Vec3(1, 1, 1)}};
  JointState b{{Vec3(3, 4, 0)}, {Vec3(1, 1, 1)}};
  CHECK(pose_distance(a, b) == 5.0);
  CHECK(pose_distance(a, b, 7.0) == 5.0);
  CHECK(pose_distance(a, a) == 0.0);
  JointState c{{Vec3(0, 0, 0), Vec3::Zero()}, {Vec3::Zero(), Vec3::Zero()}};
  CHECK_THROWS_AS(pose_distance(a, c), StructuralError);
}

TEST_CASE("pose distance is a pseudo-metric per term") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  auto state = [&] {
    JointState s;
    for (int j = 0; j < 6; ++j) {
      s.positions.emplace_back(n(rng), n(rng), n(rng));
      s.velocities.emplace_back(n(rng), n(rng), n(rng));
    }
    return s;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const JointState a = state();
    const JointState b = state();
    const JointState c = state();
    CHECK(pose_distance(a, b) >= 0.0);
    CHECK(pose_distance(a, b, 0.7) == pose_distance(b, a, 0.7));
    CHECK(pose_distance(a, b) == doctest::Approx(oracle::feat(a, b, 1.0)).epsilon(1e-12));
    // Each term on its own: weight 0 isolates positions; the velocity term
    // is the difference of weights 1 and 0.
    auto pos = [](const JointState& x, const JointState& y) { return pose_distance(x, y, 0.0); };
    auto vel = [](const JointState& x, const JointState& y) {
      return pose_distance(x, y, 1.0) - pose_distance(x, y, 0.0);
    };
    CHECK(pos(a, c) <= pos(a, b) + pos(b, c) + 1e-12);
    CHECK(vel(a, c) <= vel(a, b) + vel(b, c) + 1e-12);
  }
}

TEST_CASE("pose interpolation") {
  const Skeleton sk = chain2();
  PoseFrame a = rest(sk, 3);
  PoseFrame b = rest(sk, 8);
  a.joint_rotations[0] = Vec3(0.2, 0, 0);
  b.joint_rotations[0] = Vec3(0.6, 0, 0);
  CHECK(interpolate_pose(a, b, 0.0) == a);
  CHECK(interpolate_pose(a, b, 1.0).joint_rotations == b.joint_rotations);
  CHECK((interpolate_pose(a, b, 0.5).joint_rotations[0] - Vec3(0.4, 0, 0)).norm() < 1e-15);
  CHECK_THROWS_AS(interpolate_pose(a, b, 1.5), ValidationError);

  std::mt19937_64 rng(9);
  const Skeleton big = puppet_skeleton();
  for (int trial = 0; trial < 50; ++trial) {
    const PoseFrame p = random_pose(big, rng);
    const PoseFrame q = random_pose(big, rng);
    const PoseFrame quarter = interpolate_pose(p, q, 0.25);
    const PoseFrame x = interpolate_pose(p, q, 0.3);
    const PoseFrame y = interpolate_pose(p, q, 0.7);
    for (std::size_t j = 0; j < big.size(); ++j) {
      CHECK((quarter.joint_rotations[j] - (0.75 * p.joint_rotations[j] + 0.25 * q.joint_rotations[j])).norm() <
            1e-12);
      CHECK((x.joint_rotations[j] + y.joint_rotations[j] - p.joint_rotations[j] - q.joint_rotations[j]).norm() <
            1e-12);
    }
    CHECK((x.root_translation + y.root_translation - p.root_translation - q.root_translation).norm() < 1e-12);
  }
}
