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

// Reference computations used by the tests. None of them call into the code
// they check: rotations come from Eigen::AngleAxis, volumes from sampling,
// derivatives from central differences.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "weakcube/geometry.hpp"

namespace oracle {

using weakcube::Mat3;
using weakcube::Vec3;

inline Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Area-based rectangle GIoU written out directly.
inline double rect_giou(double ax1, double ay1, double ax2, double ay2, double bx1, double by1,
                        double bx2, double by2) {
  const double iw = std::max(0.0, std::min(ax2, bx2) - std::max(ax1, bx1));
  const double ih = std::max(0.0, std::min(ay2, by2) - std::max(ay1, by1));
  const double inter = iw * ih;
  const double uni = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter;
  const double hull = (std::max(ax2, bx2) - std::min(ax1, bx1)) *
                      (std::max(ay2, by2) - std::min(ay1, by1));
  return inter / uni - (hull - uni) / hull;
}

inline bool inside_box(const Vec3& p, const weakcube::OrientedBox& b) {
  const Vec3 local = b.rotation.transpose() * (p - b.center);
  return std::abs(local.x()) <= 0.5 * b.dims.x() && std::abs(local.y()) <= 0.5 * b.dims.y() &&
         std::abs(local.z()) <= 0.5 * b.dims.z();
}

// Monte-Carlo IoU3D: uniform samples in the axis-aligned hull of both boxes.
inline double monte_carlo_iou(const weakcube::OrientedBox& a, const weakcube::OrientedBox& b,
                              int samples, std::uint64_t seed) {
  Vec3 lo = Vec3::Constant(1e300);
  Vec3 hi = Vec3::Constant(-1e300);
  for (const auto* box : {&a, &b}) {
    for (int i = 0; i < 8; ++i) {
      const Vec3 s((i & 1) ? 0.5 : -0.5, (i & 2) ? 0.5 : -0.5, (i & 4) ? 0.5 : -0.5);
      const Vec3 c = box->center + box->rotation * s.cwiseProduct(box->dims);
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long in_a = 0, in_b = 0, in_both = 0;
  for (int i = 0; i < samples; ++i) {
    const Vec3 p(lo.x() + u(rng) * (hi.x() - lo.x()), lo.y() + u(rng) * (hi.y() - lo.y()),
                 lo.z() + u(rng) * (hi.z() - lo.z()));
    const bool ia = inside_box(p, a);
    const bool ib = inside_box(p, b);
    in_a += ia;
    in_b += ib;
    in_both += ia && ib;
  }
  const long uni = in_a + in_b - in_both;
  return uni ? static_cast<double>(in_both) / static_cast<double>(uni) : 0.0;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Golden-section minimization of a unimodal function on [a, b].
inline double golden_section_min(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-12) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  while (b - a > tol) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace oracle
