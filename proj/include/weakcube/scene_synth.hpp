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

// Synthetic indoor scenes: upright cuboids resting on a floor, seen by a
// pitched pinhole camera, rendered to a depth map by analytic ray casting.
//
// The level frame shares the camera's x axis, has y pointing down along
// gravity and z pointing forward horizontally. The floor is the plane
// y = camera_height in that frame.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "weakcube/error.hpp"
#include "weakcube/eval3d.hpp"
#include "weakcube/geometry.hpp"
#include "weakcube/image_io.hpp"
#include "weakcube/weak_losses.hpp"

namespace weakcube {

struct SynthConfig {
  int width = 320;
  int height = 240;
  double focal = 260.0;
  int min_objects = 2;
  int max_objects = 6;
  std::vector<ClassPrior> classes;  // sizes are drawn from these priors
  double yaw_min = -std::numbers::pi / 4;
  double yaw_max = std::numbers::pi / 4;
  double x_min = -2.0, x_max = 2.0;  // lateral placement, level frame
  double z_min = 2.5, z_max = 6.0;   // forward placement, level frame
  double camera_height_min = 1.2, camera_height_max = 1.6;
  double pitch_min = 0.10, pitch_max = 0.30;  // radians, positive looks down
  double depth_noise = 0.01;                  // meters
  double alignment_fraction = 0.7;
  double max_depth = 20.0;   // farther hits are left without depth
  double size_clip = 2.0;    // drawn sizes stay within this many sigmas
  double min_gap = 0.1;      // extra spacing between footprint circles
  int max_attempts = 1000;

  void validate() const {
    if (width <= 0 || height <= 0 || !(focal > 0.0)) {
      throw InvalidArgument("synth camera must have positive size and focal length");
    }
    if (min_objects < 1 || max_objects < min_objects) {
      throw InvalidArgument("object count range must satisfy 1 <= min <= max");
    }
    if (classes.empty()) throw InvalidArgument("synth config needs at least one class");
    for (const auto& c : classes) c.validate();
    if (!(yaw_max >= yaw_min) || !(x_max > x_min) || !(z_max > z_min) || !(z_min > 0.0)) {
      throw InvalidArgument("placement extents must be positive");
    }
    if (!(camera_height_min > 0.0 && camera_height_max >= camera_height_min)) {
      throw InvalidArgument("camera height range must be positive");
    }
    if (!(pitch_max >= pitch_min) || !(std::abs(pitch_min) < 1.2 && std::abs(pitch_max) < 1.2)) {
      throw InvalidArgument("camera pitch range is invalid");
    }
    if (!(depth_noise >= 0.0)) throw InvalidArgument("depth noise must be non-negative");
    if (!(alignment_fraction >= 0.0 && alignment_fraction <= 1.0)) {
      throw InvalidArgument("alignment fraction must lie in [0, 1]");
    }
    if (!(max_depth > 0.0) || !(size_clip > 0.0) || !(min_gap >= 0.0) || max_attempts < 1) {
      throw InvalidArgument("synth limits must be positive");
    }
  }
};

// Indoor classes with plausible mean sizes (w, h, l) and spreads in meters.
inline std::vector<ClassPrior> default_indoor_priors() {
  return {
      {"bed", Vec3(1.60, 0.60, 2.00), Vec3(0.20, 0.08, 0.15)},
      {"cabinet", Vec3(0.90, 1.20, 0.50), Vec3(0.15, 0.20, 0.08)},
      {"chair", Vec3(0.55, 0.85, 0.55), Vec3(0.06, 0.08, 0.06)},
      {"sofa", Vec3(1.90, 0.85, 0.90), Vec3(0.25, 0.08, 0.10)},
      {"table", Vec3(1.20, 0.75, 0.80), Vec3(0.20, 0.06, 0.12)},
  };
}

inline SynthConfig default_synth_config() {
  SynthConfig cfg;
  cfg.classes = default_indoor_priors();
  return cfg;
}

// Floor and boxes in camera coordinates; all that rendering needs.
struct SceneGeometry {
  CameraIntrinsics camera;
  Vec3 up = Vec3(0.0, -1.0, 0.0);  // unit floor normal pointing up
  double floor_offset = 1.0;       // up . p + floor_offset = 0 on the floor
  std::vector<OrientedBox> boxes;
};

struct Scene {
  SceneGeometry geometry;
  double pitch = 0.0;
  double camera_height = 1.0;
  std::vector<AnnotatedObject> objects;
  DepthMap depth;
  GroundMask ground_mask;
  std::uint64_t seed = 0;
};

struct Rendering {
  DepthMap depth;
  GroundMask ground_mask;
};

// Camera-from-level rotation for a camera pitched down by `pitch` radians.
inline Mat3 camera_from_level(double pitch) {
  const double c = std::cos(pitch);
  const double s = std::sin(pitch);
  Mat3 r;
  r << 1.0, 0.0, 0.0,
       0.0, c, -s,
       0.0, s, c;
  return r;
}

namespace detail {

// Ray p = t * dir (dir.z = 1, so t is the z depth) against an oriented box.
// Returns the entry distance when the box is entered in front of the camera.
inline std::optional<double> ray_box_entry(const Vec3& dir, const OrientedBox& b) {
  const Vec3 o = b.rotation.transpose() * (-b.center);
  const Vec3 d = b.rotation.transpose() * dir;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const double half = 0.5 * b.dims(k);
    if (d(k) == 0.0) {
      if (std::abs(o(k)) > half) return std::nullopt;
      continue;
    }
    double t1 = (-half - o(k)) / d(k);
    double t2 = (half - o(k)) / d(k);
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
  }
  if (t_near > t_far || !(t_near > 0.0)) return std::nullopt;
  return t_near;
}

inline std::optional<double> ray_floor_hit(const Vec3& dir, const SceneGeometry& g) {
  const double denom = g.up.dot(dir);
  if (!(denom < 0.0)) return std::nullopt;
  const double t = -g.floor_offset / denom;
  if (!(t > 0.0)) return std::nullopt;
  return t;
}

inline Vec3 pixel_direction(int x, int y, const CameraIntrinsics& cam) {
  return Vec3((x - cam.cx) / cam.f, (y - cam.cy) / cam.f, 1.0);
}

// Nearest hit: index of the box (or -1 for floor, -2 for nothing) and depth.
inline std::pair<int, double> nearest_hit(const Vec3& dir, const SceneGeometry& g) {
  int what = -2;
  double best = std::numeric_limits<double>::infinity();
  if (const auto t = ray_floor_hit(dir, g)) {
    best = *t;
    what = -1;
  }
  for (std::size_t i = 0; i < g.boxes.size(); ++i) {
    if (const auto t = ray_box_entry(dir, g.boxes[i]); t && *t < best) {
      best = *t;
      what = static_cast<int>(i);
    }
  }
  return {what, best};
}

}  // namespace detail

// Depth of the nearest surface per pixel plus gaussian noise; pixels whose
// nearest surface is the floor form the ground mask. Hits beyond max_depth
// and rays that hit nothing stay NaN.
inline Rendering render_depth(const SceneGeometry& g, double noise_sigma, std::uint64_t seed,
                              double max_depth = std::numeric_limits<double>::infinity()) {
  const CameraIntrinsics& cam = g.camera;
  Rendering out{DepthMap(cam.width, cam.height), GroundMask(cam.width, cam.height)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const auto [what, t] = detail::nearest_hit(detail::pixel_direction(x, y, cam), g);
      if (what == -2 || t > max_depth) continue;
      double z = t;
      if (noise_sigma > 0.0) z += noise_sigma * noise(rng);
      out.depth.at(x, y) = static_cast<float>(z);
      if (what == -1) out.ground_mask.set(x, y, true);
    }
  }
  return out;
}

// Fraction of each box's own visible-surface pixels (box rendered alone)
// that another, nearer box covers. A box with no pixels counts as fully
// occluded.
inline std::vector<double> occlusion_fractions(const SceneGeometry& g) {
  const CameraIntrinsics& cam = g.camera;
  std::vector<long> own(g.boxes.size(), 0);
  std::vector<long> hidden(g.boxes.size(), 0);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const Vec3 dir = detail::pixel_direction(x, y, cam);
      const auto [what, t_near] = detail::nearest_hit(dir, g);
      for (std::size_t i = 0; i < g.boxes.size(); ++i) {
        if (!detail::ray_box_entry(dir, g.boxes[i])) continue;
        ++own[i];
        if (what != static_cast<int>(i)) ++hidden[i];
      }
    }
  }
  std::vector<double> out(g.boxes.size(), 1.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (own[i] > 0) out[i] = static_cast<double>(hidden[i]) / static_cast<double>(own[i]);
  }
  return out;
}

// Image-clipped 2D box of a camera-frame box, through the same cube
// projection the losses use, and the fraction of its area outside the image.
inline std::pair<Box2D, double> clipped_box_and_truncation(const OrientedBox& b,
                                                           const CameraIntrinsics& cam) {
  const Box2D full = project_cube_to_aabb(oriented_box_to_cube(b, cam), cam).box;
  const Box2D clipped = clip_to_image(full, cam);
  const double area = full.area();
  const double truncation = area > 0.0 ? 1.0 - clipped.area() / area : 1.0;
  return {clipped, std::clamp(truncation, 0.0, 1.0)};
}

inline Scene generate_scene(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  std::normal_distribution<double> gauss(0.0, 1.0);

  Scene scene;
  scene.seed = seed;
  CameraIntrinsics cam{cfg.focal, 0.5 * cfg.width, 0.5 * cfg.height, cfg.width, cfg.height};
  scene.pitch = uniform(cfg.pitch_min, cfg.pitch_max);
  scene.camera_height = uniform(cfg.camera_height_min, cfg.camera_height_max);
  const Mat3 cam_from_level = camera_from_level(scene.pitch);
  scene.geometry.camera = cam;
  scene.geometry.up = cam_from_level * Vec3(0.0, -1.0, 0.0);
  scene.geometry.floor_offset = scene.camera_height;

  const double dominant_yaw = uniform(cfg.yaw_min, cfg.yaw_max);
  const int count = std::uniform_int_distribution<int>(cfg.min_objects, cfg.max_objects)(rng);

  struct Footprint {
    double x, z, radius;
  };
  std::vector<Footprint> placed;
  std::vector<std::string> categories;
  int attempts = 0;
  while (static_cast<int>(placed.size()) < count) {
    if (++attempts > cfg.max_attempts) {
      throw InfeasiblePlacement("could not place " + std::to_string(count) + " objects in " +
                                std::to_string(cfg.max_attempts) + " attempts");
    }
    const auto& prior = cfg.classes[std::uniform_int_distribution<std::size_t>(
        0, cfg.classes.size() - 1)(rng)];
    Vec3 dims;
    for (int k = 0; k < 3; ++k) {
      const double z = std::clamp(gauss(rng), -cfg.size_clip, cfg.size_clip);
      dims(k) = std::max(prior.mean(k) + z * prior.stddev(k), 0.1 * prior.mean(k));
    }
    const bool aligned = uniform(0.0, 1.0) < cfg.alignment_fraction;
    const double yaw = aligned ? dominant_yaw : uniform(cfg.yaw_min, cfg.yaw_max);
    const double x = uniform(cfg.x_min, cfg.x_max);
    const double z = uniform(cfg.z_min, cfg.z_max);
    const double radius = 0.5 * std::hypot(dims.x(), dims.z());

    bool overlaps = false;
    for (const auto& f : placed) {
      overlaps = overlaps || std::hypot(f.x - x, f.z - z) < f.radius + radius + cfg.min_gap;
    }
    if (overlaps) continue;

    OrientedBox box;
    box.dims = dims;
    box.center = cam_from_level * Vec3(x, scene.camera_height - 0.5 * dims.y(), z);
    box.rotation = cam_from_level * Eigen::AngleAxisd(yaw, Vec3::UnitY()).toRotationMatrix();

    // The box must sit well in front of the camera and project its center
    // into the image.
    bool in_front = true;
    for (const auto& c : box_corners(box)) in_front = in_front && c.z() > 0.5;
    if (!in_front) continue;
    const double u = cam.f * box.center.x() / box.center.z() + cam.cx;
    const double v = cam.f * box.center.y() / box.center.z() + cam.cy;
    if (u < 0.0 || u > cam.width || v < 0.0 || v > cam.height) continue;

    placed.push_back({x, z, radius});
    categories.push_back(prior.name);
    scene.geometry.boxes.push_back(box);
  }

  const std::vector<double> occlusion = occlusion_fractions(scene.geometry);
  for (std::size_t i = 0; i < scene.geometry.boxes.size(); ++i) {
    AnnotatedObject obj;
    obj.category = categories[i];
    obj.box = scene.geometry.boxes[i];
    std::tie(obj.box2d, obj.truncation) = clipped_box_and_truncation(obj.box, cam);
    obj.occlusion = occlusion[i];
    scene.objects.push_back(obj);
  }

  Rendering r = render_depth(scene.geometry, cfg.depth_noise, seed ^ 0x9E3779B97F4A7C15ULL,
                             cfg.max_depth);
  scene.depth = std::move(r.depth);
  scene.ground_mask = std::move(r.ground_mask);
  return scene;
}

}  // namespace weakcube
