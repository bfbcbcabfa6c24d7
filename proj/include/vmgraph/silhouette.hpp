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
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vmgraph/pose_model.hpp"

namespace vmg {

/// Pinhole camera. Camera axes follow the image convention: x right, y down,
/// z forward; a point is visible only at positive depth.
struct CameraModel {
  double focal_length = 256.0;  // pixels
  Eigen::Vector2d principal_point{128.0, 128.0};
  int width = 256;
  int height = 256;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // world to camera
  Vec3 translation = Vec3::Zero();

  /// Throws ValidationError for non-positive focal length or image size.
  void validate() const;

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
};

/// Row-major binary occupancy image, bit-packed 64 pixels per word.
class SilhouetteMask {
 public:
  SilhouetteMask() = default;
  SilhouetteMask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool get(int x, int y) const {
    const std::size_t i = index(x, y);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(int x, int y, bool value = true) {
    const std::size_t i = index(x, y);
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= bit;
    } else {
      words_[i >> 6] &= ~bit;
    }
  }

  std::size_t count() const;
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const SilhouetteMask&, const SilhouetteMask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Near plane used to clip capsules that cross behind the camera (meters).
inline constexpr double kNearPlane = 1e-3;

/// One capsule per joint spanning parent to joint (a sphere for the root).
/// A pixel is set when its center lies within the perspective-scaled radius
/// of the nearest point on a projected capsule axis.
SilhouetteMask rasterize_silhouette(const Skeleton& skeleton, std::span<const Vec3> joint_positions,
                                    const CameraModel& camera);

/// 1 - |A and B| / |A or B|; zero when both masks are empty.
double image_distance(const SilhouetteMask& a, const SilhouetteMask& b);

/// Writes a binary portable graymap (P5), 255 for set pixels.
void write_pgm(const SilhouetteMask& mask, const std::filesystem::path& path);

}  // namespace vmg
