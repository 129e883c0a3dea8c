/* Copyright 2026 The WeakCube Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Pseudo 3D ground truth from a depth map: point clouds, plane RANSAC, the
// ground normal with its confidence, and per-box depth sampling.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "weakcube/error.hpp"
#include "weakcube/geometry.hpp"
#include "weakcube/image_io.hpp"

namespace weakcube {

using PointCloud = std::vector<Vec3>;

// n . p + d = 0 for points on the plane; |n| = 1.
struct Plane {
  Vec3 normal = Vec3(0.0, -1.0, 0.0);
  double offset = 0.0;

  double signed_distance(const Vec3& p) const { return normal.dot(p) + offset; }
};

struct RansacResult {
  Plane plane;
  double inlier_fraction = 0.0;
};

inline constexpr double kGroundVisibleConfidence = 1.0;
inline constexpr double kGroundFallbackConfidence = 0.05;

struct GroundEstimate {
  Vec3 normal = Vec3(0.0, -1.0, 0.0);
  double kappa = kGroundFallbackConfidence;
  double inlier_fraction = 0.0;
};

struct RansacConfig {
  int iters = 256;
  double inlier_tol = 0.05;       // meters
  double min_inlier_frac = 0.2;   // below this the plane is not trusted
  double min_mask_frac = 0.01;    // minimum ground-mask coverage of the image
  std::uint64_t seed = 0;
};

inline PointCloud depth_to_pointcloud(const DepthMap& depth, const CameraIntrinsics& cam,
                                      const GroundMask* mask = nullptr) {
  if (depth.width != cam.width || depth.height != cam.height) {
    throw DimensionMismatch("depth map size differs from camera image size");
  }
  if (static_cast<std::size_t>(depth.width) * depth.height != depth.values.size()) {
    throw DimensionMismatch("depth map buffer size differs from its dimensions");
  }
  if (mask && (mask->width != depth.width || mask->height != depth.height)) {
    throw DimensionMismatch("ground mask size differs from depth map size");
  }
  PointCloud cloud;
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const float z = depth.at(x, y);
      if (!is_valid_depth(z)) continue;
      if (mask && !mask->at(x, y)) continue;
      cloud.push_back(backproject<double>(x, y, z, cam));
    }
  }
  return cloud;
}

namespace detail {

// Total least squares plane through the points: centroid plus the
// eigenvector of the scatter matrix with the smallest eigenvalue.
inline Plane fit_plane_least_squares(const PointCloud& pts, const std::vector<std::size_t>& idx) {
  Vec3 centroid = Vec3::Zero();
  for (auto i : idx) centroid += pts[i];
  centroid /= static_cast<double>(idx.size());
  Mat3 scatter = Mat3::Zero();
  for (auto i : idx) {
    const Vec3 q = pts[i] - centroid;
    scatter += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
  Plane plane;
  plane.normal = eig.eigenvectors().col(0).normalized();
  plane.offset = -plane.normal.dot(centroid);
  return plane;
}

inline bool cloud_is_collinear(const PointCloud& pts) {
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Mat3 scatter = Mat3::Zero();
  for (const auto& p : pts) scatter += (p - centroid) * (p - centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
  const Vec3 ev = eig.eigenvalues();  // ascending
  return ev(1) <= 1e-12 * std::max(ev(2), 1e-300);
}

}  // namespace detail

// Plane RANSAC over random 3-point samples from a seeded generator; the best
// hypothesis (most inliers, first found wins ties) is refit by least squares
// on its inliers.
inline RansacResult ransac_plane(const PointCloud& pts, std::uint64_t seed, int iters,
                                 double inlier_tol) {
  if (pts.size() < 3) throw DegenerateCloud("plane RANSAC needs at least 3 points");
  if (iters < 1) throw InvalidArgument("RANSAC needs at least one iteration");
  if (!(inlier_tol > 0.0)) throw InvalidArgument("RANSAC inlier tolerance must be positive");
  if (detail::cloud_is_collinear(pts)) throw DegenerateCloud("point cloud is collinear");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  const double tol = inlier_tol;

  std::size_t best_count = 0;
  Plane best;
  for (int it = 0; it < iters; ++it) {
    const Vec3& p0 = pts[pick(rng)];
    const Vec3& p1 = pts[pick(rng)];
    const Vec3& p2 = pts[pick(rng)];
    const Vec3 n = (p1 - p0).cross(p2 - p0);
    const double len = n.norm();
    if (!(len > 1e-12)) continue;
    Plane cand{n / len, -(n / len).dot(p0)};
    std::size_t count = 0;
    for (const auto& p : pts) count += std::abs(cand.signed_distance(p)) <= tol;
    if (count > best_count) {
      best_count = count;
      best = cand;
    }
  }
  if (best_count == 0) {
    // Every sample was degenerate; fall back to the global fit.
    std::vector<std::size_t> all(pts.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    best = detail::fit_plane_least_squares(pts, all);
  }

  std::vector<std::size_t> inliers;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(best.signed_distance(pts[i])) <= tol) inliers.push_back(i);
  }
  RansacResult out;
  out.plane = inliers.size() >= 3 ? detail::fit_plane_least_squares(pts, inliers) : best;
  std::size_t final_count = 0;
  for (const auto& p : pts) final_count += std::abs(out.plane.signed_distance(p)) <= tol;
  out.inlier_fraction = static_cast<double>(final_count) / static_cast<double>(pts.size());
  return out;
}

// Ground normal and confidence. Without a usable mask (absent or covering less
// than min_mask_frac of the image) the estimate falls back to the camera's
// -y axis with the low confidence. The normal is oriented to have y <= 0.
inline GroundEstimate estimate_ground(const DepthMap& depth, const CameraIntrinsics& cam,
                                      const GroundMask* mask, const RansacConfig& cfg) {
  if (depth.width != cam.width || depth.height != cam.height) {
    throw DimensionMismatch("depth map size differs from camera image size");
  }
  if (mask && (mask->width != depth.width || mask->height != depth.height)) {
    throw DimensionMismatch("ground mask size differs from depth map size");
  }
  GroundEstimate fallback;
  if (!mask || mask->coverage() < cfg.min_mask_frac) return fallback;

  const PointCloud cloud = depth_to_pointcloud(depth, cam, mask);
  RansacResult fit;
  try {
    fit = ransac_plane(cloud, cfg.seed, cfg.iters, cfg.inlier_tol);
  } catch (const DegenerateCloud&) {
    return fallback;
  }
  GroundEstimate out;
  out.normal = fit.plane.normal;
  if (out.normal.y() > 0.0) out.normal = -out.normal;
  out.inlier_fraction = fit.inlier_fraction;
  out.kappa = fit.inlier_fraction >= cfg.min_inlier_frac ? kGroundVisibleConfidence
                                                         : kGroundFallbackConfidence;
  return out;
}

// Pixels closer than this to the border are never sampled.
inline constexpr int kDepthSampleMargin = 10;

// Depth at the rounded box center, clamped into the image interior. A
// missing value falls back to the median of the valid depths in the 5x5
// window around the sample.
inline double sample_depth_at_center(const DepthMap& depth, const Box2D& box) {
  if (depth.width <= 2 * kDepthSampleMargin || depth.height <= 2 * kDepthSampleMargin) {
    throw DimensionMismatch("depth map is too small for the 10 px sampling margin");
  }
  const auto clampi = [](long v, long lo, long hi) { return std::clamp(v, lo, hi); };
  const long cx = std::lround(0.5 * (box.x1 + box.x2));
  const long cy = std::lround(0.5 * (box.y1 + box.y2));
  const int x = static_cast<int>(
      clampi(cx, kDepthSampleMargin, depth.width - 1 - kDepthSampleMargin));
  const int y = static_cast<int>(
      clampi(cy, kDepthSampleMargin, depth.height - 1 - kDepthSampleMargin));
  const float z = depth.at(x, y);
  if (is_valid_depth(z)) return z;

  std::vector<float> window;
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      const float v = depth.at(x + dx, y + dy);
      if (is_valid_depth(v)) window.push_back(v);
    }
  }
  if (window.empty()) throw NoValidDepth("no valid depth near the box center");
  std::sort(window.begin(), window.end());
  const std::size_t n = window.size();
  if (n % 2 == 1) return window[n / 2];
  return 0.5 * (static_cast<double>(window[n / 2 - 1]) + window[n / 2]);
}

}  // namespace weakcube
