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

// JSON schemas for priors, scenes, pseudo ground truth, fits and reports.

#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "weakcube/cube_fit.hpp"
#include "weakcube/error.hpp"
#include "weakcube/eval3d.hpp"
#include "weakcube/geometry.hpp"
#include "weakcube/pseudo_gt.hpp"
#include "weakcube/scene_synth.hpp"
#include "weakcube/weak_losses.hpp"

namespace weakcube::json_io {

using nlohmann::json;

namespace detail {

template <typename T>
T get(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad field '") + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get<T>(j, key);
}

inline json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3(const json& j, const char* key) {
  const auto v = get<std::vector<double>>(j, key);
  if (v.size() != 3) throw FormatError(std::string("field '") + key + "' must have 3 entries");
  return Vec3(v[0], v[1], v[2]);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Priors: [{"class": name, "mu": [w, h, l], "sigma": [w, h, l]}, ...]

inline json to_json(const ClassPrior& p) {
  return {{"class", p.name}, {"mu", detail::vec(p.mean)}, {"sigma", detail::vec(p.stddev)}};
}

inline ClassPrior prior_from_json(const json& j) {
  ClassPrior p{detail::get<std::string>(j, "class"), detail::vec3(j, "mu"),
               detail::vec3(j, "sigma")};
  p.validate();
  return p;
}

inline json priors_to_json(const std::vector<ClassPrior>& priors) {
  json out = json::array();
  for (const auto& p : priors) out.push_back(to_json(p));
  return out;
}

inline PriorTable priors_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("priors must be a JSON array");
  PriorTable table;
  for (const auto& e : j) {
    ClassPrior p = prior_from_json(e);
    const std::string name = p.name;
    if (!table.emplace(name, std::move(p)).second) {
      throw FormatError("duplicate prior for class '" + name + "'");
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Geometry

inline json to_json(const CameraIntrinsics& c) {
  return {{"f", c.f}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
}

inline CameraIntrinsics camera_from_json(const json& j) {
  CameraIntrinsics c{detail::get<double>(j, "f"), detail::get<double>(j, "cx"),
                     detail::get<double>(j, "cy"), detail::get<int>(j, "width"),
                     detail::get<int>(j, "height")};
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return c;
}

inline json to_json(const Cube& c) {
  return {{"u", c.u},
          {"v", c.v},
          {"z", c.z},
          {"w", c.w},
          {"h", c.h},
          {"l", c.l},
          {"rot6d", json::array({c.rot.a1.x(), c.rot.a1.y(), c.rot.a1.z(), c.rot.a2.x(),
                                 c.rot.a2.y(), c.rot.a2.z()})},
          {"mu", c.mu}};
}

inline Cube cube_from_json(const json& j) {
  Cube c;
  c.u = detail::get<double>(j, "u");
  c.v = detail::get<double>(j, "v");
  c.z = detail::get<double>(j, "z");
  c.w = detail::get<double>(j, "w");
  c.h = detail::get<double>(j, "h");
  c.l = detail::get<double>(j, "l");
  const auto r = detail::get<std::vector<double>>(j, "rot6d");
  if (r.size() != 6) throw FormatError("rot6d must have 6 entries");
  c.rot.a1 = Vec3(r[0], r[1], r[2]);
  c.rot.a2 = Vec3(r[3], r[4], r[5]);
  c.mu = detail::get_or<double>(j, "mu", 0.0);
  return c;
}

inline json to_json(const OrientedBox& b) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(b.rotation(r, c));
  }
  return {{"center", detail::vec(b.center)}, {"dims", detail::vec(b.dims)}, {"rotation", rot}};
}

inline OrientedBox box_from_json(const json& j) {
  OrientedBox b;
  b.center = detail::vec3(j, "center");
  b.dims = detail::vec3(j, "dims");
  const auto r = detail::get<std::vector<double>>(j, "rotation");
  if (r.size() != 9) throw FormatError("rotation must have 9 row-major entries");
  for (int i = 0; i < 9; ++i) b.rotation(i / 3, i % 3) = r[i];
  if (!(b.dims.minCoeff() > 0.0)) throw FormatError("box dimensions must be positive");
  return b;
}

inline json to_json(const Box2D& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

inline Box2D box2d_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 4) throw FormatError("2D box must have 4 entries");
  Box2D b{v[0], v[1], v[2], v[3]};
  if (!is_valid(b)) throw FormatError("2D box must satisfy x1 <= x2, y1 <= y2");
  return b;
}

// ---------------------------------------------------------------------------
// Synth config

inline json to_json(const SynthConfig& c) {
  return {{"width", c.width},
          {"height", c.height},
          {"focal", c.focal},
          {"min_objects", c.min_objects},
          {"max_objects", c.max_objects},
          {"classes", priors_to_json(c.classes)},
          {"yaw_min", c.yaw_min},
          {"yaw_max", c.yaw_max},
          {"x_min", c.x_min},
          {"x_max", c.x_max},
          {"z_min", c.z_min},
          {"z_max", c.z_max},
          {"camera_height_min", c.camera_height_min},
          {"camera_height_max", c.camera_height_max},
          {"pitch_min", c.pitch_min},
          {"pitch_max", c.pitch_max},
          {"depth_noise", c.depth_noise},
          {"alignment_fraction", c.alignment_fraction},
          {"max_depth", c.max_depth},
          {"size_clip", c.size_clip},
          {"min_gap", c.min_gap},
          {"max_attempts", c.max_attempts}};
}

// Missing keys keep their defaults; the result is validated.
inline SynthConfig synth_config_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("synth config must be a JSON object");
  SynthConfig c = default_synth_config();
  using detail::get_or;
  c.width = get_or(j, "width", c.width);
  c.height = get_or(j, "height", c.height);
  c.focal = get_or(j, "focal", c.focal);
  c.min_objects = get_or(j, "min_objects", c.min_objects);
  c.max_objects = get_or(j, "max_objects", c.max_objects);
  if (j.contains("classes")) {
    c.classes.clear();
    for (const auto& [name, prior] : priors_from_json(j.at("classes"))) c.classes.push_back(prior);
  }
  c.yaw_min = get_or(j, "yaw_min", c.yaw_min);
  c.yaw_max = get_or(j, "yaw_max", c.yaw_max);
  c.x_min = get_or(j, "x_min", c.x_min);
  c.x_max = get_or(j, "x_max", c.x_max);
  c.z_min = get_or(j, "z_min", c.z_min);
  c.z_max = get_or(j, "z_max", c.z_max);
  c.camera_height_min = get_or(j, "camera_height_min", c.camera_height_min);
  c.camera_height_max = get_or(j, "camera_height_max", c.camera_height_max);
  c.pitch_min = get_or(j, "pitch_min", c.pitch_min);
  c.pitch_max = get_or(j, "pitch_max", c.pitch_max);
  c.depth_noise = get_or(j, "depth_noise", c.depth_noise);
  c.alignment_fraction = get_or(j, "alignment_fraction", c.alignment_fraction);
  c.max_depth = get_or(j, "max_depth", c.max_depth);
  c.size_clip = get_or(j, "size_clip", c.size_clip);
  c.min_gap = get_or(j, "min_gap", c.min_gap);
  c.max_attempts = get_or(j, "max_attempts", c.max_attempts);
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// scene.json (depth and mask live next to it as depth.pfm / ground_mask.pgm)

inline json scene_to_json(const Scene& s) {
  const CameraIntrinsics& cam = s.geometry.camera;
  json objects = json::array();
  for (const auto& o : s.objects) {
    objects.push_back({{"category", o.category},
                       {"box3d", to_json(o.box)},
                       {"cube", to_json(oriented_box_to_cube(o.box, cam))},
                       {"box2d", to_json(o.box2d)},
                       {"truncation", o.truncation},
                       {"occlusion", o.occlusion}});
  }
  return {{"seed", s.seed},
          {"camera", to_json(cam)},
          {"pitch", s.pitch},
          {"camera_height", s.camera_height},
          {"floor", {{"up", detail::vec(s.geometry.up)}, {"offset", s.geometry.floor_offset}}},
          {"objects", objects},
          {"depth", "depth.pfm"},
          {"ground_mask", "ground_mask.pgm"}};
}

// Reads everything except the depth map and mask.
inline Scene scene_from_json(const json& j) {
  Scene s;
  s.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
  s.geometry.camera = camera_from_json(detail::get<json>(j, "camera"));
  s.pitch = detail::get_or<double>(j, "pitch", 0.0);
  s.camera_height = detail::get_or<double>(j, "camera_height", 1.0);
  if (j.contains("floor")) {
    s.geometry.up = detail::vec3(j.at("floor"), "up");
    s.geometry.floor_offset = detail::get<double>(j.at("floor"), "offset");
  }
  for (const auto& o : detail::get<json>(j, "objects")) {
    AnnotatedObject obj;
    obj.category = detail::get<std::string>(o, "category");
    obj.box = box_from_json(detail::get<json>(o, "box3d"));
    obj.box2d = box2d_from_json(detail::get<json>(o, "box2d"));
    obj.truncation = detail::get_or<double>(o, "truncation", 0.0);
    obj.occlusion = detail::get_or<double>(o, "occlusion", 0.0);
    s.geometry.boxes.push_back(obj.box);
    s.objects.push_back(std::move(obj));
  }
  return s;
}

// ---------------------------------------------------------------------------
// pseudo_gt.json

inline json to_json(const GroundEstimate& g) {
  return {{"normal", detail::vec(g.normal)},
          {"kappa", g.kappa},
          {"inlier_fraction", g.inlier_fraction}};
}

inline GroundEstimate ground_from_json(const json& j) {
  GroundEstimate g;
  g.normal = detail::vec3(j, "normal");
  g.kappa = detail::get<double>(j, "kappa");
  g.inlier_fraction = detail::get_or<double>(j, "inlier_fraction", 0.0);
  if (std::abs(g.normal.norm() - 1.0) > 1e-6) throw FormatError("ground normal must be unit");
  return g;
}

inline json to_json(const PseudoGT& p) {
  return {{"status", "ok"}, {"per_box_depth", p.per_box_depth}, {"ground", to_json(p.ground)}};
}

inline PseudoGT pseudo_gt_from_json(const json& j) {
  if (detail::get_or<std::string>(j, "status", "ok") != "ok") {
    throw FormatError("pseudo ground truth is marked failed");
  }
  PseudoGT p;
  // Missing depths are serialized as null.
  for (const auto& d : detail::get<json>(j, "per_box_depth")) {
    p.per_box_depth.push_back(d.is_number() ? d.get<double>()
                                            : std::numeric_limits<double>::quiet_NaN());
  }
  p.ground = ground_from_json(detail::get<json>(j, "ground"));
  return p;
}

// ---------------------------------------------------------------------------
// fit.json

inline json to_json(const LossBreakdown& b) {
  return {{"giou", b.giou}, {"z", b.z},     {"dim", b.dim},    {"normal", b.normal},
          {"pose", b.pose}, {"l3d", b.l3d}, {"total", b.total}};
}

inline json to_json(const LossWeights& w) {
  return {{"giou", w.giou}, {"z", w.z}, {"dim", w.dim}, {"normal", w.normal}, {"pose", w.pose}};
}

inline LossWeights weights_from_json(const json& j) {
  LossWeights w{detail::get<double>(j, "giou"), detail::get<double>(j, "z"),
                detail::get<double>(j, "dim"), detail::get<double>(j, "normal"),
                detail::get<double>(j, "pose")};
  return w;
}

struct FitRecord {
  std::vector<std::string> categories;
  std::vector<Cube> cubes;
  std::vector<double> scores;
};

inline json fit_to_json(const FitResult& r, std::span<const LabeledBox> boxes,
                        const CameraIntrinsics& cam, const LossWeights& w) {
  json cubes = json::array();
  for (std::size_t i = 0; i < r.cubes.size(); ++i) {
    cubes.push_back({{"category", boxes[i].category},
                     {"box2d", to_json(boxes[i].box)},
                     {"score", r.scores[i]},
                     {"cube", to_json(r.cubes[i])},
                     {"box3d", to_json(cube_to_oriented_box(r.cubes[i], cam))},
                     {"losses", to_json(r.losses.per_cube[i])}});
  }
  return {{"camera", to_json(cam)},
          {"weights", to_json(w)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"initial_loss", r.loss_history.front()},
          {"final_loss", r.loss_history.back()},
          {"scene_losses", to_json(r.losses.scene)},
          {"cubes", cubes}};
}

inline FitRecord fit_record_from_json(const json& j) {
  FitRecord rec;
  for (const auto& c : detail::get<json>(j, "cubes")) {
    rec.categories.push_back(detail::get<std::string>(c, "category"));
    rec.cubes.push_back(cube_from_json(detail::get<json>(c, "cube")));
    rec.scores.push_back(detail::get<double>(c, "score"));
  }
  return rec;
}

// ---------------------------------------------------------------------------
// report.json

// Rounds to 6 significant digits so reports diff cleanly.
inline double round6(double x) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return std::strtod(buf, nullptr);
}

inline json report_to_json(const APReport& r) {
  json per_class = json::object();
  for (const auto& [name, cls] : r.per_class) {
    json taus = json::array();
    for (double a : cls.ap_per_tau) taus.push_back(round6(a));
    per_class[name] = {{"ap_per_tau", taus},
                       {"ap", round6(cls.ap)},
                       {"num_gt", cls.num_gt},
                       {"num_det", cls.num_det}};
  }
  json thresholds = json::array();
  for (double t : r.thresholds) thresholds.push_back(round6(t));
  json mean_per_tau = json::array();
  for (double a : r.mean_ap_per_tau) mean_per_tau.push_back(round6(a));
  return {{"thresholds", thresholds},
          {"per_class", per_class},
          {"mean_ap_per_tau", mean_per_tau},
          {"mean_ap", round6(r.mean_ap)}};
}

}  // namespace weakcube::json_io
