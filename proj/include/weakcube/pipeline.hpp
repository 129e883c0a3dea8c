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

// Glue between the stages: scene -> pseudo labels -> fit -> evaluation
// records, plus the recovery statistics reported next to AP.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "weakcube/cube_fit.hpp"
#include "weakcube/eval3d.hpp"
#include "weakcube/pseudo_gt.hpp"
#include "weakcube/scene_synth.hpp"

namespace weakcube {

inline std::vector<LabeledBox> labeled_boxes(const Scene& scene) {
  std::vector<LabeledBox> out;
  out.reserve(scene.objects.size());
  for (const auto& o : scene.objects) out.push_back({o.box2d, o.category});
  return out;
}

// Ground estimate plus one depth per box. Boxes without any valid depth near
// their center get NaN.
inline PseudoGT make_pseudo_gt(const DepthMap& depth, const GroundMask* mask,
                               const CameraIntrinsics& cam, std::span<const LabeledBox> boxes,
                               const RansacConfig& cfg) {
  PseudoGT out;
  out.ground = estimate_ground(depth, cam, mask, cfg);
  out.per_box_depth.reserve(boxes.size());
  for (const auto& b : boxes) {
    try {
      out.per_box_depth.push_back(sample_depth_at_center(depth, b.box));
    } catch (const NoValidDepth&) {
      out.per_box_depth.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

inline void append_ground_truth(const Scene& scene, int image, const EvalConfig& cfg,
                                std::vector<GroundTruth>& out) {
  for (const auto& o : scene.objects) {
    out.push_back({o.box, o.category, image, !passes_filter(o, cfg, scene.geometry.camera)});
  }
}

inline double up_axis_error_deg(const Cube& c, const CameraIntrinsics& cam, const Vec3& up) {
  const double cosine = std::clamp(cube_up_axis(c, cam).normalized().dot(up.normalized()), -1.0, 1.0);
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

// Per-object recovery figures over the objects that survive the filter.
// Fitted cubes pair with ground truth by index; a pair counts as matched
// when its IoU3D reaches match_iou.
struct RecoveryStats {
  double match_iou = 0.25;
  double up_tolerance_deg = 5.0;

  int evaluated = 0;
  int matched = 0;
  int matched_up_ok = 0;
  double iou_sum = 0.0;
  double zscore_sum = 0.0;
  int zscored = 0;

  // One fitted cube against the object it was fitted to. Without priors the
  // z-score average is left out.
  void add_pair(const Scene& scene, std::size_t object, const Cube& cube,
                const PriorTable* priors, const EvalConfig& cfg) {
    const auto& cam = scene.geometry.camera;
    const auto& o = scene.objects.at(object);
    if (!passes_filter(o, cfg, cam)) return;
    const double iou = iou3d(cube_to_oriented_box(cube, cam), o.box);
    ++evaluated;
    iou_sum += iou;
    if (priors) {
      const auto it = priors->find(o.category);
      if (it == priors->end()) throw MissingPrior("no size prior for class '" + o.category + "'");
      zscore_sum += dimension_zscore(cube, it->second);
      ++zscored;
    }
    if (iou >= match_iou) {
      ++matched;
      if (up_axis_error_deg(cube, cam, scene.geometry.up) < up_tolerance_deg) ++matched_up_ok;
    }
  }

  // Cubes listed in object order.
  void add(const Scene& scene, std::span<const Cube> cubes, const PriorTable* priors,
           const EvalConfig& cfg) {
    for (std::size_t i = 0; i < scene.objects.size() && i < cubes.size(); ++i) {
      add_pair(scene, i, cubes[i], priors, cfg);
    }
  }

  double mean_iou() const { return evaluated ? iou_sum / evaluated : 0.0; }
  double mean_zscore() const { return zscored ? zscore_sum / zscored : 0.0; }
  double up_ok_fraction() const {
    return matched ? static_cast<double>(matched_up_ok) / matched : 0.0;
  }
};

}  // namespace weakcube
