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

#include "vmgraph/silhouette.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <string>

#include "vmgraph/error.hpp"

namespace vmg {

void CameraModel::validate() const {
  if (!(focal_length > 0.0) || !std::isfinite(focal_length)) {
    throw ValidationError("camera focal length must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw ValidationError("camera image size must be positive");
  }
  if (!principal_point.allFinite() || !rotation.allFinite() || !translation.allFinite()) {
    throw ValidationError("camera parameters must be finite");
  }
}

SilhouetteMask::SilhouetteMask(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("mask size must be positive");
  }
  const std::size_t bits = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  words_.assign((bits + 63) / 64, 0);
}

std::size_t SilhouetteMask::count() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

SilhouetteMask rasterize_silhouette(const Skeleton& skeleton, std::span<const Vec3> joint_positions,
                                    const CameraModel& camera) {
  camera.validate();
  if (joint_positions.size() != skeleton.size()) {
    throw StructuralError("rasterizer got " + std::to_string(joint_positions.size()) +
                          " positions for " + std::to_string(skeleton.size()) + " joints");
  }
  SilhouetteMask mask(camera.width, camera.height);
  const double f = camera.focal_length;
  const Eigen::Vector2d pp = camera.principal_point;

  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    const Joint& joint = skeleton[i];
    Vec3 a = camera.to_camera(joint.parent ? joint_positions[*joint.parent] : joint_positions[i]);
    Vec3 b = camera.to_camera(joint_positions[i]);
    if (a.z() < kNearPlane && b.z() < kNearPlane) continue;
    if (a.z() < kNearPlane) {
      a = a + (b - a) * ((kNearPlane - a.z()) / (b.z() - a.z()));
    } else if (b.z() < kNearPlane) {
      b = b + (a - b) * ((kNearPlane - b.z()) / (a.z() - b.z()));
    }
    const double inv_a = 1.0 / a.z();
    const double inv_b = 1.0 / b.z();
    const Eigen::Vector2d pa(f * a.x() * inv_a + pp.x(), f * a.y() * inv_a + pp.y());
    const Eigen::Vector2d pb(f * b.x() * inv_b + pp.x(), f * b.y() * inv_b + pp.y());
    const double scale = f * joint.capsule_radius;
    const double reach = scale * std::max(inv_a, inv_b);

    const double x_lo = std::min(pa.x(), pb.x()) - reach;
    const double x_hi = std::max(pa.x(), pb.x()) + reach;
    const double y_lo = std::min(pa.y(), pb.y()) - reach;
    const double y_hi = std::max(pa.y(), pb.y()) + reach;
    if (x_hi < 0.0 || y_hi < 0.0 || x_lo > camera.width || y_lo > camera.height) continue;
    const int x0 = std::max(0, static_cast<int>(std::floor(x_lo)));
    const int x1 = std::min(camera.width - 1, static_cast<int>(std::ceil(x_hi)));
    const int y0 = std::max(0, static_cast<int>(std::floor(y_lo)));
    const int y1 = std::min(camera.height - 1, static_cast<int>(std::ceil(y_hi)));

    const Eigen::Vector2d axis = pb - pa;
    const double axis_sq = axis.squaredNorm();
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Eigen::Vector2d q(x + 0.5, y + 0.5);
        double t = 0.0;
        if (axis_sq > 0.0) {
          t = std::clamp((q - pa).dot(axis) / axis_sq, 0.0, 1.0);
        }
        const Eigen::Vector2d nearest = pa + t * axis;
        const double radius = scale * ((1.0 - t) * inv_a + t * inv_b);
        if ((q - nearest).squaredNorm() <= radius * radius) {
          mask.set(x, y);
        }
      }
    }
  }
  return mask;
}

namespace {

struct Overlap {
  std::size_t inter;
  std::size_t uni;
};

// Hardware popcount where the CPU has it; graph construction spends most of
// its time here.
#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
__attribute__((target_clones("popcnt", "default")))
#endif
Overlap overlap_counts(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < n; ++i) {
    inter += static_cast<std::size_t>(__builtin_popcountll(a[i] & b[i]));
    uni += static_cast<std::size_t>(__builtin_popcountll(a[i] | b[i]));
  }
  return {inter, uni};
}

}  // namespace

double image_distance(const SilhouetteMask& a, const SilhouetteMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw StructuralError("mask sizes differ: " + std::to_string(a.width()) + "x" +
                          std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                          std::to_string(b.height()));
  }
  const auto [inter, uni] = overlap_counts(a.words().data(), b.words().data(), a.words().size());
  if (uni == 0) return 0.0;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

void write_pgm(const SilhouetteMask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  std::string row(static_cast<std::size_t>(mask.width()), '\0');
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      row[static_cast<std::size_t>(x)] = mask.get(x, y) ? static_cast<char>(255) : '\0';
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

}  // namespace vmg
