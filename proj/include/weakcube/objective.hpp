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

// Scene-level weak objective and its gradient.
//
// Each cube i carries l3d_i = sum of its weighted loss terms, where the pose
// term is the cube's share of the scene pose loss (mean of 1 - cos over the
// other cubes). The scene objective is
//
//   L = sum_i sqrt(2) exp(-mu_i) l3d_i + mu_i.
//
// Everything except the pose term is separable per cube, so the gradient is
// assembled from 13-parameter dual numbers per cube plus 26-parameter dual
// numbers per cube pair.

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <ceres/jet.h>

#include "weakcube/error.hpp"
#include "weakcube/geometry.hpp"
#include "weakcube/pseudo_gt.hpp"
#include "weakcube/weak_losses.hpp"

namespace weakcube {

// What a single 2D box contributes to the weak supervision.
struct ObjectTarget {
  Box2D box;
  double z_pseudo = 1.0;
  ClassPrior prior;
};

struct SceneBreakdown {
  std::vector<LossBreakdown> per_cube;
  LossBreakdown scene;  // sums over cubes; scene.pose is the mean-over-pairs pose loss
};

class SceneObjective {
 public:
  SceneObjective(std::vector<ObjectTarget> targets, GroundEstimate ground, CameraIntrinsics cam,
                 LossWeights weights)
      : targets_(std::move(targets)), ground_(ground), cam_(cam), weights_(weights) {
    cam_.validate();
    weights_.validate();
    for (const auto& t : targets_) {
      t.prior.validate();
      if (!(t.z_pseudo > 0.0) || !std::isfinite(t.z_pseudo)) {
        throw MissingPseudoDepth("pseudo depth must be positive and finite");
      }
    }
  }

  std::size_t size() const { return targets_.size(); }
  const std::vector<ObjectTarget>& targets() const { return targets_; }
  const GroundEstimate& ground() const { return ground_; }
  const CameraIntrinsics& camera() const { return cam_; }
  const LossWeights& weights() const { return weights_; }

  SceneBreakdown breakdown(std::span<const Cube> cubes) const {
    check_size(cubes.size());
    SceneBreakdown out;
    out.per_cube.resize(cubes.size());
    const std::vector<double> shares = pose_shares(cubes, cam_);
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      LossBreakdown& b = out.per_cube[i];
      const Cube& c = cubes[i];
      const ObjectTarget& t = targets_[i];
      b.giou = loss_giou(c, t.box, cam_);
      b.z = loss_z(t.z_pseudo, c);
      b.dim = loss_dim(c, t.prior);
      b.normal = loss_normal(ground_, c, cam_);
      b.pose = shares[i];
      b.l3d = combine_l3d(b, weights_);
      b.total = total_loss(b.l3d, c.mu);
      out.scene.giou += b.giou;
      out.scene.z += b.z;
      out.scene.dim += b.dim;
      out.scene.normal += b.normal;
      out.scene.l3d += b.l3d;
      out.scene.total += b.total;
    }
    out.scene.pose = loss_pose(cubes, cam_);
    return out;
  }

  // Scene objective; +inf where a cube is invalid (degenerate rotation,
  // non-positive size or depth).
  double value(std::span<const Cube> cubes) const {
    check_size(cubes.size());
    if (!all_valid(cubes)) return std::numeric_limits<double>::infinity();
    try {
      const double v = breakdown(cubes).scene.total;
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const DegenerateRotation&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  // Gradient with respect to the 13 parameters of every cube, laid out cube
  // by cube in to_params order.
  std::vector<double> gradient(std::span<const Cube> cubes) const {
    check_size(cubes.size());
    const std::size_t n = cubes.size();
    std::vector<double> grad(n * kCubeParamCount, 0.0);
    using Unary = ceres::Jet<double, kCubeParamCount>;
    for (std::size_t i = 0; i < n; ++i) {
      const BasicCube<Unary> c = seed_jets<Unary>(cubes[i], 0);
      const Unary u = unary_term(c, targets_[i]);
      for (int k = 0; k < kCubeParamCount; ++k) grad[i * kCubeParamCount + k] += u.v[k];
    }
    if (n >= 2) {
      using Pair = ceres::Jet<double, 2 * kCubeParamCount>;
      const double scale = std::numbers::sqrt2 * weights_.pose / static_cast<double>(n - 1);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const BasicCube<Pair> ci = seed_jets<Pair>(cubes[i], 0);
          const BasicCube<Pair> cj = seed_jets<Pair>(cubes[j], kCubeParamCount);
          using std::exp;
          const Pair misalign =
              Pair(1.0) - pairwise_pose_cos(egocentric_rotation(ci, cam_),
                                            egocentric_rotation(cj, cam_));
          const Pair term = scale * (exp(-ci.mu) + exp(-cj.mu)) * misalign;
          for (int k = 0; k < kCubeParamCount; ++k) {
            grad[i * kCubeParamCount + k] += term.v[k];
            grad[j * kCubeParamCount + k] += term.v[kCubeParamCount + k];
          }
        }
      }
    }
    return grad;
  }

 private:
  void check_size(std::size_t n) const {
    if (n != targets_.size()) throw InvalidArgument("cube count differs from target count");
  }

  static bool all_valid(std::span<const Cube> cubes) {
    for (const auto& c : cubes) {
      for (double p : to_params(c)) {
        if (!std::isfinite(p)) return false;
      }
      if (!(c.z > 0.0 && c.w > 0.0 && c.h > 0.0 && c.l > 0.0)) return false;
    }
    return true;
  }

  template <typename J>
  static BasicCube<J> seed_jets(const Cube& c, int offset) {
    const auto p = to_params(c);
    std::array<J, kCubeParamCount> jp;
    for (int k = 0; k < kCubeParamCount; ++k) jp[k] = J(p[k], offset + k);
    return cube_from_params<J>(std::span<const J, kCubeParamCount>(jp));
  }

  // sqrt(2) exp(-mu) (l3d without the pose share) + mu.
  template <typename T>
  T unary_term(const BasicCube<T>& c, const ObjectTarget& t) const {
    const T l3d = combine_l3d(loss_giou(c, t.box, cam_), loss_z(t.z_pseudo, c),
                              loss_dim(c, t.prior), loss_normal(ground_, c, cam_), T(0.0),
                              weights_);
    return total_loss(l3d, c.mu);
  }

  std::vector<ObjectTarget> targets_;
  GroundEstimate ground_;
  CameraIntrinsics cam_;
  LossWeights weights_;
};

// Central-difference gradient of the objective in the natural cube
// parameters; the reference used to check SceneObjective::gradient.
inline std::vector<double> numeric_gradient(const SceneObjective& obj, std::span<const Cube> cubes,
                                            double h) {
  std::vector<Cube> work(cubes.begin(), cubes.end());
  std::vector<double> grad(cubes.size() * kCubeParamCount, 0.0);
  for (std::size_t i = 0; i < work.size(); ++i) {
    const auto base = to_params(cubes[i]);
    for (int k = 0; k < kCubeParamCount; ++k) {
      auto plus = base;
      auto minus = base;
      plus[k] += h;
      minus[k] -= h;
      work[i] = cube_from_params<double>(std::span<const double, kCubeParamCount>(plus));
      const double fp = obj.value(work);
      work[i] = cube_from_params<double>(std::span<const double, kCubeParamCount>(minus));
      const double fm = obj.value(work);
      grad[i * kCubeParamCount + k] = (fp - fm) / (2.0 * h);
    }
    work[i] = cubes[i];
  }
  return grad;
}

}  // namespace weakcube
