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

// Oriented-box IoU3D by convex polytope clipping, ground-truth filtering and
// mean AP3D over a grid of IoU thresholds.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "weakcube/error.hpp"
#include "weakcube/geometry.hpp"

namespace weakcube {

// Distances within this tolerance of a clipping plane count as on it.
inline constexpr double kWeldTolerance = 1e-12;

namespace detail {

using Polygon = std::vector<Vec3>;
using Polytope = std::vector<Polygon>;

inline Polytope box_polytope(const OrientedBox& b) {
  const auto c = box_corners(b);
  Polytope faces;
  for (int axis = 0; axis < 3; ++axis) {
    const int b1 = 1 << ((axis + 1) % 3);
    const int b2 = 1 << ((axis + 2) % 3);
    for (int side = 0; side < 2; ++side) {
      const int base = side ? (1 << axis) : 0;
      faces.push_back({c[base], c[base | b1], c[base | b1 | b2], c[base | b2]});
    }
  }
  return faces;
}

inline bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

// Edge/plane intersection evaluated from the lexicographically smaller
// endpoint, so both faces sharing an edge produce the identical point.
inline Vec3 edge_crossing(const Vec3& p, double dp, const Vec3& q, double dq) {
  if (lex_less(q, p)) return edge_crossing(q, dq, p, dp);
  return p + (dp / (dp - dq)) * (q - p);
}

inline void add_unique(Polygon& pts, const Vec3& p) {
  for (const auto& q : pts) {
    if ((q - p).cwiseAbs().maxCoeff() <= kWeldTolerance) return;
  }
  pts.push_back(p);
}

inline Polygon order_cap(Polygon pts, const Vec3& normal) {
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  const Vec3 e1 = normal.unitOrthogonal();
  const Vec3 e2 = normal.cross(e1);
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 d = pts[i] - centroid;
    keyed.emplace_back(std::atan2(d.dot(e2), d.dot(e1)), i);
  }
  std::sort(keyed.begin(), keyed.end());
  Polygon out;
  out.reserve(pts.size());
  for (const auto& [angle, i] : keyed) out.push_back(pts[i]);
  return out;
}

// Keeps the part of the polytope with normal . p + offset <= 0 and closes it
// with a cap polygon on the plane.
inline Polytope clip_polytope(const Polytope& poly, const Vec3& normal, double offset) {
  double max_dist = -std::numeric_limits<double>::infinity();
  double min_dist = std::numeric_limits<double>::infinity();
  for (const auto& face : poly) {
    for (const auto& p : face) {
      const double d = normal.dot(p) + offset;
      max_dist = std::max(max_dist, d);
      min_dist = std::min(min_dist, d);
    }
  }
  if (max_dist <= kWeldTolerance) return poly;
  if (min_dist > kWeldTolerance) return {};

  Polytope out;
  Polygon cap;
  for (const auto& face : poly) {
    Polygon kept;
    const std::size_t n = face.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3& p = face[i];
      const Vec3& q = face[(i + 1) % n];
      const double dp = normal.dot(p) + offset;
      const double dq = normal.dot(q) + offset;
      const bool p_in = dp <= kWeldTolerance;
      const bool q_in = dq <= kWeldTolerance;
      if (p_in) {
        kept.push_back(p);
        if (std::abs(dp) <= kWeldTolerance) add_unique(cap, p);
      }
      if (p_in != q_in) {
        const Vec3 x = edge_crossing(p, dp, q, dq);
        kept.push_back(x);
        add_unique(cap, x);
      }
    }
    if (kept.size() >= 3) out.push_back(std::move(kept));
  }
  if (cap.size() >= 3) out.push_back(order_cap(std::move(cap), normal));
  return out;
}

inline double polytope_volume(const Polytope& poly) {
  Vec3 interior = Vec3::Zero();
  std::size_t count = 0;
  for (const auto& face : poly) {
    for (const auto& p : face) {
      interior += p;
      ++count;
    }
  }
  if (count == 0) return 0.0;
  interior /= static_cast<double>(count);
  double vol = 0.0;
  for (const auto& face : poly) {
    for (std::size_t i = 1; i + 1 < face.size(); ++i) {
      const Vec3 a = face[0] - interior;
      const Vec3 b = face[i] - interior;
      const Vec3 c = face[i + 1] - interior;
      vol += std::abs(a.dot(b.cross(c))) / 6.0;
    }
  }
  return vol;
}

}  // namespace detail

inline double box_volume(const OrientedBox& b) { return b.dims.prod(); }

// Exact intersection volume: box a's polytope clipped by the six face planes
// of box b.
inline double intersection_volume(const OrientedBox& a, const OrientedBox& b) {
  detail::Polytope poly = detail::box_polytope(a);
  for (int axis = 0; axis < 3 && !poly.empty(); ++axis) {
    const Vec3 n = b.rotation.col(axis);
    const double half = 0.5 * b.dims(axis);
    const double c = n.dot(b.center);
    poly = detail::clip_polytope(poly, n, -(c + half));
    if (!poly.empty()) poly = detail::clip_polytope(poly, -n, c - half);
  }
  return detail::polytope_volume(poly);
}

inline double iou3d(const OrientedBox& a, const OrientedBox& b) {
  const double inter = intersection_volume(a, b);
  const double uni = box_volume(a) + box_volume(b) - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Ground-truth filtering

struct EvalConfig {
  std::vector<double> thresholds = {0.05, 0.10, 0.15, 0.20, 0.25,
                                    0.30, 0.35, 0.40, 0.45, 0.50};
  double max_occlusion = 0.66;
  double max_truncation = 0.33;
  double min_height_fraction = 0.0625;  // of the image height

  void validate() const {
    if (thresholds.empty()) throw InvalidArgument("at least one IoU threshold is required");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) {
        throw InvalidArgument("IoU thresholds must lie in (0, 1)");
      }
      if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
        throw InvalidArgument("IoU thresholds must be strictly increasing");
      }
    }
  }
};

// A ground-truth object with the annotations the filter rules need.
struct AnnotatedObject {
  std::string category;
  OrientedBox box;
  Box2D box2d;  // clipped to the image
  double truncation = 0.0;
  double occlusion = 0.0;
};

inline bool passes_filter(const AnnotatedObject& o, const EvalConfig& cfg,
                          const CameraIntrinsics& cam) {
  if (o.occlusion > cfg.max_occlusion) return false;
  if (o.truncation > cfg.max_truncation) return false;
  return o.box2d.height() >= cfg.min_height_fraction * cam.height;
}

inline std::vector<AnnotatedObject> filter_objects(std::span<const AnnotatedObject> gts,
                                                   const EvalConfig& cfg,
                                                   const CameraIntrinsics& cam) {
  std::vector<AnnotatedObject> kept;
  for (const auto& o : gts) {
    if (passes_filter(o, cfg, cam)) kept.push_back(o);
  }
  return kept;
}

// ---------------------------------------------------------------------------
// AP3D

struct Detection {
  OrientedBox box;
  std::string category;
  double score = 1.0;
  int image = 0;
};

// Ignored ground truths neither count as misses nor turn matching
// detections into false positives.
struct GroundTruth {
  OrientedBox box;
  std::string category;
  int image = 0;
  bool ignore = false;
};

struct ClassAP {
  std::vector<double> ap_per_tau;
  double ap = 0.0;
  int num_gt = 0;
  int num_det = 0;
};

struct APReport {
  std::vector<double> thresholds;
  std::map<std::string, ClassAP> per_class;  // classes with at least one counted GT
  std::vector<double> mean_ap_per_tau;
  double mean_ap = 0.0;
};

// Area under the precision envelope (all-point interpolation).
inline double average_precision(std::span<const double> recall, std::span<const double> precision) {
  std::vector<double> mrec(recall.size() + 2);
  std::vector<double> mpre(precision.size() + 2);
  mrec.front() = 0.0;
  mrec.back() = 1.0;
  mpre.front() = 0.0;
  mpre.back() = 0.0;
  std::copy(recall.begin(), recall.end(), mrec.begin() + 1);
  std::copy(precision.begin(), precision.end(), mpre.begin() + 1);
  for (std::size_t i = mpre.size() - 1; i > 0; --i) mpre[i - 1] = std::max(mpre[i - 1], mpre[i]);
  double ap = 0.0;
  for (std::size_t i = 1; i < mrec.size(); ++i) ap += (mrec[i] - mrec[i - 1]) * mpre[i];
  return ap;
}

namespace detail {

// AP for one class at one threshold. `iou[d][g]` holds IoU3D of the d-th
// detection (already sorted by score) with the g-th ground truth; pairs from
// different images hold -1.
inline double class_ap_at(const std::vector<std::vector<double>>& iou,
                          std::span<const GroundTruth* const> gts, double tau, int num_pos) {
  if (num_pos == 0) return 0.0;
  std::vector<bool> used(gts.size(), false);
  std::vector<double> recall;
  std::vector<double> precision;
  int tp = 0;
  int fp = 0;
  for (const auto& row : iou) {
    int best = -1;
    double best_iou = -1.0;
    bool hits_ignored = false;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (row[g] < tau) continue;
      if (gts[g]->ignore) {
        hits_ignored = true;
        continue;
      }
      if (used[g]) continue;
      if (row[g] > best_iou) {
        best_iou = row[g];
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      used[best] = true;
      ++tp;
    } else if (hits_ignored) {
      continue;
    } else {
      ++fp;
    }
    recall.push_back(static_cast<double>(tp) / num_pos);
    precision.push_back(static_cast<double>(tp) / (tp + fp));
  }
  return average_precision(recall, precision);
}

}  // namespace detail

inline APReport ap3d(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                     const EvalConfig& cfg) {
  cfg.validate();
  APReport report;
  report.thresholds = cfg.thresholds;
  report.mean_ap_per_tau.assign(cfg.thresholds.size(), 0.0);

  std::map<std::string, std::vector<const GroundTruth*>> gt_by_class;
  for (const auto& g : gts) gt_by_class[g.category].push_back(&g);
  std::map<std::string, std::vector<const Detection*>> det_by_class;
  for (const auto& d : dets) det_by_class[d.category].push_back(&d);

  for (const auto& [name, class_gts] : gt_by_class) {
    int num_pos = 0;
    for (const auto* g : class_gts) num_pos += g->ignore ? 0 : 1;
    if (num_pos == 0) continue;

    std::vector<const Detection*> class_dets = det_by_class[name];
    std::stable_sort(class_dets.begin(), class_dets.end(),
                     [](const Detection* a, const Detection* b) { return a->score > b->score; });
    std::vector<std::vector<double>> iou(class_dets.size(),
                                         std::vector<double>(class_gts.size(), -1.0));
    for (std::size_t d = 0; d < class_dets.size(); ++d) {
      for (std::size_t g = 0; g < class_gts.size(); ++g) {
        if (class_dets[d]->image == class_gts[g]->image) {
          iou[d][g] = iou3d(class_dets[d]->box, class_gts[g]->box);
        }
      }
    }

    ClassAP cls;
    cls.num_gt = num_pos;
    cls.num_det = static_cast<int>(class_dets.size());
    for (double tau : cfg.thresholds) {
      cls.ap_per_tau.push_back(detail::class_ap_at(iou, class_gts, tau, num_pos));
    }
    cls.ap = std::accumulate(cls.ap_per_tau.begin(), cls.ap_per_tau.end(), 0.0) /
             static_cast<double>(cls.ap_per_tau.size());
    report.per_class.emplace(name, std::move(cls));
  }

  if (!report.per_class.empty()) {
    const double k = static_cast<double>(report.per_class.size());
    for (const auto& [name, cls] : report.per_class) {
      report.mean_ap += cls.ap / k;
      for (std::size_t t = 0; t < cls.ap_per_tau.size(); ++t) {
        report.mean_ap_per_tau[t] += cls.ap_per_tau[t] / k;
      }
    }
  }
  return report;
}

}  // namespace weakcube
