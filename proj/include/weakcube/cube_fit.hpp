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

// Per-scene cube fitting: one cube per 2D box, jointly optimized on the
// weak objective by preconditioned gradient descent with Armijo backtracking.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "weakcube/error.hpp"
#include "weakcube/geometry.hpp"
#include "weakcube/objective.hpp"
#include "weakcube/pseudo_gt.hpp"
#include "weakcube/weak_losses.hpp"

namespace weakcube {

struct LabeledBox {
  Box2D box;
  std::string category;
};

// Stand-in for 3D labels: one pseudo depth per box plus the scene ground.
struct PseudoGT {
  std::vector<double> per_box_depth;
  GroundEstimate ground;
};

using PriorTable = std::map<std::string, ClassPrior>;

enum class GradientMode { kAnalytic, kFiniteDifference };

struct FitConfig {
  int max_iters = 500;
  // Preconditioner: typical step per parameter group. Depth and dimensions
  // are optimized as logarithms, so their step is relative.
  double step_pixels = 10.0;
  double step_log = 0.1;
  double step_rotation = 0.1;
  double step_mu = 0.5;
  double tol = 1e-7;      // stop when one iteration lowers the loss by less
  double fd_step = 1e-5;  // only used with GradientMode::kFiniteDifference
  double armijo_c = 1e-4;
  double shrink = 0.5;
  GradientMode gradient = GradientMode::kAnalytic;
  LossWeights weights;
  // Extra starts with a random yaw (rotation about each cube's body y axis);
  // the start with the lowest final loss wins. 0 keeps the single
  // deterministic initialization.
  int restarts = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
    if (!(fd_step > 0.0)) throw InvalidArgument("finite-difference step must be positive");
    if (!(tol > 0.0)) throw InvalidArgument("convergence tolerance must be positive");
    if (!(step_pixels > 0.0 && step_log > 0.0 && step_rotation > 0.0 && step_mu > 0.0)) {
      throw InvalidArgument("step sizes must be positive");
    }
    if (!(armijo_c > 0.0 && armijo_c < 1.0 && shrink > 0.0 && shrink < 1.0)) {
      throw InvalidArgument("line search constants must lie in (0, 1)");
    }
    if (restarts < 0) throw InvalidArgument("restarts must be non-negative");
    weights.validate();
  }
};

struct FitResult {
  std::vector<Cube> cubes;
  SceneBreakdown losses;
  std::vector<double> scores;        // exp(-l3d) per cube
  std::vector<double> loss_history;  // objective after each accepted step, [0] = initial
  int iterations = 0;
  bool converged = false;
};

inline Cube init_cube(const Box2D& box, double z_pseudo, const ClassPrior& prior,
                      const CameraIntrinsics& cam) {
  (void)cam;
  if (!(z_pseudo > 0.0)) throw InvalidArgument("pseudo depth must be positive");
  Cube c;
  c.u = 0.5 * (box.x1 + box.x2);
  c.v = 0.5 * (box.y1 + box.y2);
  c.z = z_pseudo;
  c.w = prior.mean.x();
  c.h = prior.mean.y();
  c.l = prior.mean.z();
  c.rot = Rot6D{};
  c.mu = 0.0;
  return c;
}

namespace detail {

// Optimization coordinates: u, v, log z, log w, log h, log l, a1, a2, mu.
inline std::vector<double> to_search_space(std::span<const Cube> cubes) {
  std::vector<double> x;
  x.reserve(cubes.size() * kCubeParamCount);
  for (const auto& c : cubes) {
    auto p = to_params(c);
    for (int k = 2; k <= 5; ++k) p[k] = std::log(p[k]);
    x.insert(x.end(), p.begin(), p.end());
  }
  return x;
}

inline std::vector<Cube> from_search_space(std::span<const double> x) {
  std::vector<Cube> cubes;
  cubes.reserve(x.size() / kCubeParamCount);
  for (std::size_t i = 0; i < x.size(); i += kCubeParamCount) {
    std::array<double, kCubeParamCount> p;
    for (int k = 0; k < kCubeParamCount; ++k) p[k] = x[i + k];
    for (int k = 2; k <= 5; ++k) p[k] = std::exp(p[k]);
    cubes.push_back(cube_from_params<double>(std::span<const double, kCubeParamCount>(p)));
  }
  return cubes;
}

inline double group_step(int k, const FitConfig& cfg) {
  if (k <= 1) return cfg.step_pixels;
  if (k <= 5) return cfg.step_log;
  if (k <= 11) return cfg.step_rotation;
  return cfg.step_mu;
}

struct DescentRun {
  std::vector<Cube> cubes;
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;
};

inline DescentRun descend(const SceneObjective& obj, std::vector<Cube> start,
                          const FitConfig& cfg) {
  DescentRun run;
  std::vector<double> x = to_search_space(start);
  double f = obj.value(start);
  run.history.push_back(f);
  if (!std::isfinite(f)) throw InvalidArgument("initial cubes have a non-finite loss");

  std::vector<double> scale(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = group_step(static_cast<int>(i % kCubeParamCount), cfg);
    scale[i] = s * s;
  }

  double alpha = 1.0;
  std::vector<double> trial(x.size());
  for (int it = 0; it < cfg.max_iters; ++it) {
    const std::vector<Cube> cubes = from_search_space(x);
    std::vector<double> g = cfg.gradient == GradientMode::kAnalytic
                                ? obj.gradient(cubes)
                                : numeric_gradient(obj, cubes, cfg.fd_step);
    // Chain rule into log depth / log dimensions.
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      const auto p = to_params(cubes[i]);
      for (int k = 2; k <= 5; ++k) g[i * kCubeParamCount + k] *= p[k];
    }
    double slope = 0.0;  // g . d with d = -S g
    for (std::size_t i = 0; i < x.size(); ++i) slope -= scale[i] * g[i] * g[i];
    if (!(slope < 0.0)) {
      run.converged = true;
      break;
    }

    alpha = std::min(1.0, 2.0 * alpha);
    double f_new = f;
    bool accepted = false;
    while (alpha > 1e-14) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - alpha * scale[i] * g[i];
      f_new = obj.value(from_search_space(trial));
      if (f_new <= f + cfg.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= cfg.shrink;
    }
    run.iterations = it + 1;
    if (!accepted) {
      run.converged = true;
      break;
    }
    const double decrease = f - f_new;
    x.swap(trial);
    f = f_new;
    run.history.push_back(f);
    if (decrease < cfg.tol) {
      run.converged = true;
      break;
    }
  }
  run.cubes = from_search_space(x);
  return run;
}

// Rotation about the camera-frame up axis of the given cube by `angle`.
inline Cube with_yaw(const Cube& c, double angle) {
  const Mat3 r = rot6d_to_matrix(c.rot);
  const Mat3 yaw = Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix();
  Cube out = c;
  out.rot = matrix_to_rot6d(r * yaw);
  return out;
}

}  // namespace detail

inline std::vector<ObjectTarget> make_targets(std::span<const LabeledBox> boxes,
                                              const PseudoGT& pseudo, const PriorTable& priors) {
  if (pseudo.per_box_depth.size() != boxes.size()) {
    throw MissingPseudoDepth("pseudo depth count differs from box count");
  }
  std::vector<ObjectTarget> targets;
  targets.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto it = priors.find(boxes[i].category);
    if (it == priors.end()) throw MissingPrior("no size prior for class '" + boxes[i].category + "'");
    const double z = pseudo.per_box_depth[i];
    if (!std::isfinite(z) || !(z > 0.0)) {
      throw MissingPseudoDepth("box " + std::to_string(i) + " has no valid pseudo depth");
    }
    targets.push_back(ObjectTarget{boxes[i].box, z, it->second});
  }
  return targets;
}

inline FitResult fit_scene(std::span<const LabeledBox> boxes, const PseudoGT& pseudo,
                           const CameraIntrinsics& cam, const PriorTable& priors,
                           const FitConfig& cfg) {
  cfg.validate();
  const SceneObjective obj(make_targets(boxes, pseudo, priors), pseudo.ground, cam, cfg.weights);

  std::vector<Cube> init;
  init.reserve(boxes.size());
  for (const auto& t : obj.targets()) init.push_back(init_cube(t.box, t.z_pseudo, t.prior, cam));

  FitResult result;
  const SceneBreakdown start = obj.breakdown(init);
  bool satisfied = true;
  for (const auto& b : start.per_cube) satisfied = satisfied && b.l3d == 0.0;
  detail::DescentRun best;
  if (init.empty() || satisfied) {
    // Every weak constraint already holds; only mu would still move.
    best.cubes = init;
    best.history = {obj.value(init)};
    best.converged = true;
  } else {
    best = detail::descend(obj, init, cfg);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> yaw(-std::numbers::pi / 2, std::numbers::pi / 2);
    for (int r = 0; r < cfg.restarts; ++r) {
      std::vector<Cube> start_r = init;
      for (auto& c : start_r) c = detail::with_yaw(c, yaw(rng));
      detail::DescentRun run = detail::descend(obj, start_r, cfg);
      if (run.history.back() < best.history.back()) best = std::move(run);
    }
  }
  result.cubes = std::move(best.cubes);
  result.loss_history = std::move(best.history);
  result.iterations = best.iterations;
  result.converged = best.converged;
  result.losses = obj.breakdown(result.cubes);
  result.scores.reserve(result.cubes.size());
  for (const auto& b : result.losses.per_cube) {
    result.scores.push_back(std::max(std::exp(-b.l3d), std::numeric_limits<double>::min()));
  }
  return result;
}

}  // namespace weakcube
