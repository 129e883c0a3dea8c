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

// Weak 3D losses computed from 2D boxes, pseudo depth, class size priors and
// the ground normal. All per-cube losses are templated on the scalar type so
// the objective can differentiate them with dual numbers.

#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "weakcube/error.hpp"
#include "weakcube/geometry.hpp"
#include "weakcube/pseudo_gt.hpp"

namespace weakcube {

// Per-class size statistics; dimensions ordered (w, h, l).
struct ClassPrior {
  std::string name;
  Vec3 mean = Vec3::Ones();
  Vec3 stddev = Vec3::Ones();

  void validate() const {
    if (!(mean.minCoeff() > 0.0) || !(stddev.minCoeff() > 0.0)) {
      throw InvalidArgument("class prior '" + name + "' must have positive entries");
    }
  }
};

struct LossWeights {
  double giou = 4.0;
  double z = 1.0;
  double dim = 0.1;
  double normal = 70.0;
  double pose = 7.0;

  void validate() const {
    if (!(giou >= 0.0 && z >= 0.0 && dim >= 0.0 && normal >= 0.0 && pose >= 0.0)) {
      throw InvalidArgument("loss weights must be non-negative");
    }
  }
};

struct LossBreakdown {
  double giou = 0.0;
  double z = 0.0;
  double dim = 0.0;
  double normal = 0.0;
  double pose = 0.0;
  double l3d = 0.0;
  double total = 0.0;
};

namespace detail {

template <typename T>
T min_of(const T& a, const T& b) {
  return b < a ? b : a;
}

template <typename T>
T max_of(const T& a, const T& b) {
  return a < b ? b : a;
}

}  // namespace detail

// Generalized IoU: IoU minus the share of the enclosing box not covered by
// the union. Zero-area boxes have IoU 0; a zero-area hull contributes 0.
template <typename T>
T giou_2d(const BasicBox2D<T>& a, const BasicBox2D<T>& b) {
  using detail::max_of;
  using detail::min_of;
  const T iw = max_of(T(0.0), min_of(a.x2, b.x2) - max_of(a.x1, b.x1));
  const T ih = max_of(T(0.0), min_of(a.y2, b.y2) - max_of(a.y1, b.y1));
  const T inter = iw * ih;
  const T uni = a.area() + b.area() - inter;
  const T iou = uni > 0.0 ? T(inter / uni) : T(0.0);
  const T hull = (max_of(a.x2, b.x2) - min_of(a.x1, b.x1)) *
                 (max_of(a.y2, b.y2) - min_of(a.y1, b.y1));
  if (!(hull > 0.0)) return iou;
  return iou - (hull - uni) / hull;
}

template <typename T>
T loss_giou(const BasicCube<T>& cube, const Box2D& gt, const CameraIntrinsics& cam) {
  const BasicBox2D<T> target{T(gt.x1), T(gt.y1), T(gt.x2), T(gt.y2)};
  return T(1.0) - giou_2d(target, project_cube_to_aabb(cube, cam).box);
}

template <typename T>
T loss_z(double z_pseudo, const BasicCube<T>& cube) {
  using std::abs;
  return abs(T(z_pseudo) - cube.z);
}

// Mean absolute z-score over (w, h, l), hinged: values up to 1 are free.
template <typename T>
T dimension_zscore(const BasicCube<T>& cube, const ClassPrior& prior) {
  using std::abs;
  return (abs(cube.w - prior.mean.x()) / prior.stddev.x() +
          abs(cube.h - prior.mean.y()) / prior.stddev.y() +
          abs(cube.l - prior.mean.z()) / prior.stddev.z()) /
         3.0;
}

template <typename T>
T loss_dim(const BasicCube<T>& cube, const ClassPrior& prior) {
  const T z = dimension_zscore(cube, prior);
  return z > 1.0 ? z : T(0.0);
}

inline constexpr double kCosSimEps = 1e-8;

inline double cos_sim(const Vec3& n1, const Vec3& n2) {
  const double denom = std::max(n1.norm() * n2.norm(), kCosSimEps);
  return n1.dot(n2) / denom;
}

// Local up of a cube in the camera frame: body -y mapped by the egocentric
// rotation.
template <typename T>
Vec3T<T> cube_up_axis(const BasicCube<T>& cube, const CameraIntrinsics& cam) {
  return -egocentric_rotation(cube, cam).col(1);
}

template <typename T>
T loss_normal(const GroundEstimate& ground, const BasicCube<T>& cube,
              const CameraIntrinsics& cam) {
  const Vec3T<T> up = cube_up_axis(cube, cam);
  const Vec3T<T> n = ground.normal.cast<T>();
  const T denom = n.norm() * up.norm();
  const T cs = n.dot(up) / (denom > kCosSimEps ? denom : T(kCosSimEps));
  return (T(1.0) - cs) * ground.kappa;
}

// |cos| of the relative angle, from Tr(R1 R2^T) = 1 + 2 cos(theta).
template <typename T>
T pairwise_pose_cos(const Mat3T<T>& r1, const Mat3T<T>& r2) {
  using std::abs;
  return abs(T(0.5) * ((r1 * r2.transpose()).trace() - T(1.0)));
}

// Mean of (1 - cos) over all unordered pairs of egocentric rotations; 0 for
// fewer than two cubes.
inline double loss_pose(std::span<const Cube> cubes, const CameraIntrinsics& cam) {
  const std::size_t n = cubes.size();
  if (n < 2) return 0.0;
  std::vector<Mat3> rot;
  rot.reserve(n);
  for (const auto& c : cubes) rot.push_back(egocentric_rotation(c, cam));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sum += 1.0 - pairwise_pose_cos(rot[i], rot[j]);
  }
  return sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

// Per-cube share of the pose loss: mean of (1 - cos) over the other cubes.
// The mean of these shares equals loss_pose.
inline std::vector<double> pose_shares(std::span<const Cube> cubes, const CameraIntrinsics& cam) {
  const std::size_t n = cubes.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  std::vector<Mat3> rot;
  rot.reserve(n);
  for (const auto& c : cubes) rot.push_back(egocentric_rotation(c, cam));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double x = 1.0 - pairwise_pose_cos(rot[i], rot[j]);
      out[i] += x;
      out[j] += x;
    }
  }
  for (auto& v : out) v /= static_cast<double>(n - 1);
  return out;
}

template <typename T>
T combine_l3d(const T& giou, const T& z, const T& dim, const T& normal, const T& pose,
              const LossWeights& w) {
  return w.giou * giou + w.z * z + w.dim * dim + w.normal * normal + w.pose * pose;
}

inline double combine_l3d(const LossBreakdown& terms, const LossWeights& w) {
  return combine_l3d(terms.giou, terms.z, terms.dim, terms.normal, terms.pose, w);
}

// sqrt(2) exp(-mu) l3d + mu.
template <typename T>
T total_loss(const T& l3d, const T& mu) {
  using std::exp;
  return std::numbers::sqrt2 * exp(-mu) * l3d + mu;
}

}  // namespace weakcube
