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

// Pinhole camera, 6D rotations, cube corners and projection.
//
// Camera frame: x right, y down, z forward. Pixel (u, v) has its center at
// integer coordinates. Every function that participates in a loss is a
// template on the scalar type so that it can be evaluated with dual numbers.

#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "weakcube/error.hpp"

namespace weakcube {

template <typename T>
using Vec2T = Eigen::Matrix<T, 2, 1>;
template <typename T>
using Vec3T = Eigen::Matrix<T, 3, 1>;
template <typename T>
using Mat3T = Eigen::Matrix<T, 3, 3>;

using Vec2 = Vec2T<double>;
using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;

// Points closer than this are clamped when projecting.
inline constexpr double kMinDepth = 1e-3;

struct CameraIntrinsics {
  double f = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  void validate() const {
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw InvalidArgument("camera focal length must be positive");
    }
    if (width <= 0 || height <= 0) {
      throw InvalidArgument("camera image size must be positive");
    }
    if (!(cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height)) {
      throw InvalidArgument("principal point lies outside the image");
    }
  }

  bool operator==(const CameraIntrinsics&) const = default;
};

template <typename T>
struct BasicRot6D {
  Vec3T<T> a1 = Vec3T<T>(T(1.0), T(0.0), T(0.0));
  Vec3T<T> a2 = Vec3T<T>(T(0.0), T(1.0), T(0.0));
};
using Rot6D = BasicRot6D<double>;

template <typename T>
struct BasicBox2D {
  T x1{}, y1{}, x2{}, y2{};

  T width() const { return x2 - x1; }
  T height() const { return y2 - y1; }
  T area() const { return width() * height(); }
};
using Box2D = BasicBox2D<double>;

inline bool is_valid(const Box2D& b) {
  return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
         std::isfinite(b.y2) && b.x2 >= b.x1 && b.y2 >= b.y1;
}

// The 13-parameter cube: projected center (u, v) in pixels, depth z and
// dimensions (w, h, l) in meters, allocentric 6D rotation and uncertainty mu.
// w spans the body x axis, h the body y axis (local up is -y), l the body z
// axis.
template <typename T>
struct BasicCube {
  T u{}, v{};
  T z = T(1.0);
  T w = T(1.0), h = T(1.0), l = T(1.0);
  BasicRot6D<T> rot;
  T mu{};
};
using Cube = BasicCube<double>;

inline constexpr int kCubeParamCount = 13;

// Parameter order: u v z w h l a1.x a1.y a1.z a2.x a2.y a2.z mu.
template <typename T>
std::array<T, kCubeParamCount> to_params(const BasicCube<T>& c) {
  return {c.u,        c.v,        c.z,        c.w,        c.h,
          c.l,        c.rot.a1.x(), c.rot.a1.y(), c.rot.a1.z(), c.rot.a2.x(),
          c.rot.a2.y(), c.rot.a2.z(), c.mu};
}

template <typename T>
BasicCube<T> cube_from_params(std::span<const T, kCubeParamCount> p) {
  BasicCube<T> c;
  c.u = p[0];
  c.v = p[1];
  c.z = p[2];
  c.w = p[3];
  c.h = p[4];
  c.l = p[5];
  c.rot.a1 = Vec3T<T>(p[6], p[7], p[8]);
  c.rot.a2 = Vec3T<T>(p[9], p[10], p[11]);
  c.mu = p[12];
  return c;
}

inline void validate(const Cube& c) {
  if (!(c.w > 0.0 && c.h > 0.0 && c.l > 0.0)) {
    throw InvalidArgument("cube dimensions must be positive");
  }
  if (!(c.z > 0.0)) throw InvalidArgument("cube depth must be positive");
}

// Camera-frame oriented box, the representation used for IoU3D and rendering.
struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Vec3 dims = Vec3::Ones();  // (w, h, l)
  Mat3 rotation = Mat3::Identity();
};

// ---------------------------------------------------------------------------
// Rotations

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
  const Mat3 err = r.transpose() * r - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

// Gram-Schmidt on the two 6D columns. Throws DegenerateRotation when a1 is
// (near) zero or a1 and a2 are (near) parallel.
template <typename T>
Mat3T<T> rot6d_to_matrix(const BasicRot6D<T>& r) {
  using std::abs;
  const T n1 = r.a1.norm();
  if (!(n1 > 1e-12)) throw DegenerateRotation("6D rotation has a zero first column");
  const Vec3T<T> b1 = r.a1 / n1;
  const T n2 = r.a2.norm();
  // |sin| of the angle between a1 and a2 must exceed ~1e-6 rad.
  if (!(n2 > 1e-12) || !(b1.cross(r.a2).norm() > 1e-6 * n2)) {
    throw DegenerateRotation("6D rotation columns are parallel");
  }
  const Vec3T<T> b2 = (r.a2 - b1.dot(r.a2) * b1).normalized();
  const Vec3T<T> b3 = b1.cross(b2);
  Mat3T<T> m;
  m.col(0) = b1;
  m.col(1) = b2;
  m.col(2) = b3;
  return m;
}

inline Rot6D matrix_to_rot6d(const Mat3& r) {
  return Rot6D{r.col(0), r.col(1)};
}

// Unit viewing ray through pixel (u, v).
template <typename T>
Vec3T<T> pixel_ray(const T& u, const T& v, const CameraIntrinsics& cam) {
  return Vec3T<T>((u - cam.cx) / cam.f, (v - cam.cy) / cam.f, T(1.0)).normalized();
}

// Minimal rotation taking the optical axis (0, 0, 1) onto the unit ray r.
// Rodrigues form with unnormalized axis k = e_z x r and cos = r_z; r_z > 0
// holds for every pixel ray, so 1 + cos never vanishes.
template <typename T>
Mat3T<T> ray_rotation(const Vec3T<T>& r) {
  Mat3T<T> k;
  k << T(0.0), T(0.0), r.x(),
       T(0.0), T(0.0), r.y(),
       -r.x(), -r.y(), T(0.0);
  return Mat3T<T>::Identity() + k + (k * k) / (T(1.0) + r.z());
}

template <typename T>
Mat3T<T> allocentric_to_egocentric(const Mat3T<T>& r_allo, const T& u, const T& v,
                                   const CameraIntrinsics& cam) {
  return ray_rotation(pixel_ray(u, v, cam)) * r_allo;
}

template <typename T>
Mat3T<T> egocentric_to_allocentric(const Mat3T<T>& r_ego, const T& u, const T& v,
                                   const CameraIntrinsics& cam) {
  return ray_rotation(pixel_ray(u, v, cam)).transpose() * r_ego;
}

template <typename T>
Mat3T<T> egocentric_rotation(const BasicCube<T>& c, const CameraIntrinsics& cam) {
  return allocentric_to_egocentric(rot6d_to_matrix(c.rot), c.u, c.v, cam);
}

// ---------------------------------------------------------------------------
// Back-projection and corners

template <typename T>
Vec3T<T> backproject(const T& u, const T& v, const T& z, const CameraIntrinsics& cam) {
  return Vec3T<T>((u - cam.cx) * z / cam.f, (v - cam.cy) * z / cam.f, z);
}

// Corner i uses +half-extent on an axis when the matching bit is set:
// bit0 -> w (body x), bit1 -> h (body y), bit2 -> l (body z). Corner 0 is
// (-w/2, -h/2, -l/2), corner 7 is (+w/2, +h/2, +l/2).
template <typename T>
std::array<Vec3T<T>, 8> box_corners(const Vec3T<T>& center, const Mat3T<T>& rotation,
                                    const Vec3T<T>& dims) {
  std::array<Vec3T<T>, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Vec3T<T> local((i & 1 ? T(0.5) : T(-0.5)) * dims.x(),
                         (i & 2 ? T(0.5) : T(-0.5)) * dims.y(),
                         (i & 4 ? T(0.5) : T(-0.5)) * dims.z());
    out[i] = center + rotation * local;
  }
  return out;
}

template <typename T>
std::array<Vec3T<T>, 8> cube_corners(const BasicCube<T>& c, const CameraIntrinsics& cam) {
  const Vec3T<T> center = backproject(c.u, c.v, c.z, cam);
  return box_corners(center, egocentric_rotation(c, cam), Vec3T<T>(c.w, c.h, c.l));
}

inline std::array<Vec3, 8> box_corners(const OrientedBox& b) {
  return box_corners(b.center, b.rotation, b.dims);
}

inline OrientedBox cube_to_oriented_box(const Cube& c, const CameraIntrinsics& cam) {
  return OrientedBox{backproject(c.u, c.v, c.z, cam), Vec3(c.w, c.h, c.l),
                     egocentric_rotation(c, cam)};
}

// Inverse of cube_to_oriented_box for boxes in front of the camera; mu is 0.
inline Cube oriented_box_to_cube(const OrientedBox& b, const CameraIntrinsics& cam) {
  if (!(b.center.z() > 0.0)) throw BehindCamera("box center is behind the camera");
  Cube c;
  c.u = cam.f * b.center.x() / b.center.z() + cam.cx;
  c.v = cam.f * b.center.y() / b.center.z() + cam.cy;
  c.z = b.center.z();
  c.w = b.dims.x();
  c.h = b.dims.y();
  c.l = b.dims.z();
  c.rot = matrix_to_rot6d(egocentric_to_allocentric(b.rotation, c.u, c.v, cam));
  c.mu = 0.0;
  return c;
}

// ---------------------------------------------------------------------------
// Projection

enum class DepthPolicy { kThrow, kClamp };

// Projects one point, restoring the principal-point offset. Under kClamp a
// depth below kMinDepth is replaced by kMinDepth and `clamped` is set.
template <typename T>
Vec2T<T> project_point(const Vec3T<T>& p, const CameraIntrinsics& cam, DepthPolicy policy,
                       bool& clamped) {
  T z = p.z();
  if (!(z > kMinDepth)) {
    if (policy == DepthPolicy::kThrow) {
      throw BehindCamera("point is behind the camera (z <= 1e-3 m)");
    }
    z = T(kMinDepth);
    clamped = true;
  }
  return Vec2T<T>(cam.f * p.x() / z + cam.cx, cam.f * p.y() / z + cam.cy);
}

struct Projection {
  std::vector<Vec2> points;
  bool clamped = false;
};

inline Projection project_points(std::span<const Vec3> points, const CameraIntrinsics& cam,
                                 DepthPolicy policy = DepthPolicy::kThrow) {
  Projection out;
  out.points.reserve(points.size());
  for (const Vec3& p : points) {
    out.points.push_back(project_point(p, cam, policy, out.clamped));
  }
  return out;
}

template <typename T>
struct BasicProjectedBox {
  BasicBox2D<T> box;
  bool clamped = false;  // at least one corner sat behind the camera
};

template <typename T>
BasicProjectedBox<T> project_corners_to_aabb(const std::array<Vec3T<T>, 8>& corners,
                                             const CameraIntrinsics& cam) {
  BasicProjectedBox<T> out;
  for (int i = 0; i < 8; ++i) {
    const Vec2T<T> q = project_point(corners[i], cam, DepthPolicy::kClamp, out.clamped);
    if (i == 0) {
      out.box = {q.x(), q.y(), q.x(), q.y()};
      continue;
    }
    if (q.x() < out.box.x1) out.box.x1 = q.x();
    if (q.x() > out.box.x2) out.box.x2 = q.x();
    if (q.y() < out.box.y1) out.box.y1 = q.y();
    if (q.y() > out.box.y2) out.box.y2 = q.y();
  }
  return out;
}

template <typename T>
BasicProjectedBox<T> project_cube_to_aabb(const BasicCube<T>& c, const CameraIntrinsics& cam) {
  return project_corners_to_aabb(cube_corners(c, cam), cam);
}

inline Box2D clip_to_image(const Box2D& b, const CameraIntrinsics& cam) {
  const auto clampd = [](double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
  };
  const double w = cam.width;
  const double h = cam.height;
  return Box2D{clampd(b.x1, 0.0, w), clampd(b.y1, 0.0, h), clampd(b.x2, 0.0, w),
               clampd(b.y2, 0.0, h)};
}

}  // namespace weakcube
