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

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gradient_cases.hpp"
#include "weakcube/objective.hpp"

namespace weakcube {
namespace {

SceneObjective objective_for(const gradcase::Case& c, LossWeights w = {}) {
  return SceneObjective(c.targets, c.ground, c.cam, w);
}

// Straight sum over cubes and pairs, written without the shares helper.
double brute_force_total(const gradcase::Case& c, const LossWeights& w) {
  const std::size_t n = c.cubes.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Cube& k = c.cubes[i];
    const ObjectTarget& t = c.targets[i];
    double pose = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      pose += 1.0 - pairwise_pose_cos(egocentric_rotation(k, c.cam),
                                      egocentric_rotation(c.cubes[j], c.cam));
    }
    if (n > 1) pose /= static_cast<double>(n - 1);
    const double l3d = w.giou * loss_giou(k, t.box, c.cam) + w.z * loss_z(t.z_pseudo, k) +
                       w.dim * loss_dim(k, t.prior) + w.normal * loss_normal(c.ground, k, c.cam) +
                       w.pose * pose;
    total += std::numbers::sqrt2 * std::exp(-k.mu) * l3d + k.mu;
  }
  return total;
}

TEST(SceneObjective, GradientMatchesCentralDifference) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> count(1, 8);
  for (int s = 0; s < 60; ++s) {
    const gradcase::Case c = gradcase::smooth_case(rng, count(rng));
    const SceneObjective obj = objective_for(c);
    const auto analytic = obj.gradient(c.cubes);
    const auto reference = gradcase::central_difference(obj, c.cubes, 1e-5);
    ASSERT_EQ(analytic.size(), c.cubes.size() * kCubeParamCount);
    EXPECT_LT(gradcase::max_relative_error(analytic, reference), 1e-4) << "scene " << s;
  }
}

TEST(SceneObjective, GradientWithNonDefaultWeights) {
  std::mt19937_64 rng(77);
  const LossWeights w{0.5, 2.0, 0.25, 3.0, 1.5};
  for (int s = 0; s < 20; ++s) {
    const gradcase::Case c = gradcase::smooth_case(rng, 1 + s % 5);
    const SceneObjective obj = objective_for(c, w);
    EXPECT_LT(gradcase::max_relative_error(obj.gradient(c.cubes),
                                           gradcase::central_difference(obj, c.cubes, 1e-5)),
              1e-4);
  }
}

TEST(SceneObjective, LibraryNumericGradientAgreesWithReference) {
  std::mt19937_64 rng(5);
  const gradcase::Case c = gradcase::smooth_case(rng, 4);
  const SceneObjective obj = objective_for(c);
  const auto a = numeric_gradient(obj, c.cubes, 1e-5);
  const auto b = gradcase::central_difference(obj, c.cubes, 1e-5);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(a[i], b[i]);
}

TEST(SceneObjective, ValueMatchesBruteForce) {
  std::mt19937_64 rng(8);
  const LossWeights w{1.0, 0.7, 1.3, 0.4, 2.0};
  for (int s = 0; s < 30; ++s) {
    const gradcase::Case c = gradcase::random_case(rng, 1 + s % 6);
    EXPECT_NEAR(objective_for(c, w).value(c.cubes), brute_force_total(c, w),
                1e-9 * std::max(1.0, std::abs(brute_force_total(c, w))));
  }
}

TEST(SceneObjective, BreakdownIsConsistent) {
  std::mt19937_64 rng(9);
  const gradcase::Case c = gradcase::random_case(rng, 5);
  const LossWeights w{};
  const SceneBreakdown b = objective_for(c, w).breakdown(c.cubes);
  ASSERT_EQ(b.per_cube.size(), 5u);
  double giou = 0, z = 0, dim = 0, normal = 0, l3d = 0, total = 0, share = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    const LossBreakdown& p = b.per_cube[i];
    giou += p.giou;
    z += p.z;
    dim += p.dim;
    normal += p.normal;
    l3d += p.l3d;
    total += p.total;
    share += p.pose;
    EXPECT_NEAR(p.l3d, combine_l3d(p, w), 1e-12);
    EXPECT_NEAR(p.total, std::numbers::sqrt2 * std::exp(-c.cubes[i].mu) * p.l3d + c.cubes[i].mu,
                1e-12);
  }
  EXPECT_NEAR(b.scene.giou, giou, 1e-12);
  EXPECT_NEAR(b.scene.z, z, 1e-12);
  EXPECT_NEAR(b.scene.dim, dim, 1e-12);
  EXPECT_NEAR(b.scene.normal, normal, 1e-12);
  EXPECT_NEAR(b.scene.l3d, l3d, 1e-12);
  EXPECT_NEAR(b.scene.total, total, 1e-12);
  EXPECT_NEAR(b.scene.pose, share / 5.0, 1e-12);
  EXPECT_NEAR(b.scene.pose, loss_pose(c.cubes, c.cam), 1e-12);
}

TEST(SceneObjective, InvalidCubesGiveInfinity) {
  std::mt19937_64 rng(10);
  const gradcase::Case c = gradcase::random_case(rng, 2);
  const SceneObjective obj = objective_for(c);
  const double inf = std::numeric_limits<double>::infinity();
  auto bad = c.cubes;
  bad[1].z = -1.0;
  EXPECT_EQ(obj.value(bad), inf);
  bad = c.cubes;
  bad[0].w = 0.0;
  EXPECT_EQ(obj.value(bad), inf);
  bad = c.cubes;
  bad[0].rot.a2 = bad[0].rot.a1 * 3.0;
  EXPECT_EQ(obj.value(bad), inf);
  bad = c.cubes;
  bad[1].u = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(obj.value(bad), inf);
}

TEST(SceneObjective, RejectsBadInputs) {
  std::mt19937_64 rng(11);
  const gradcase::Case c = gradcase::random_case(rng, 2);
  const SceneObjective obj = objective_for(c);
  EXPECT_THROW(obj.value(std::span<const Cube>(c.cubes.data(), 1)), InvalidArgument);
  EXPECT_THROW(obj.gradient(std::span<const Cube>(c.cubes.data(), 1)), InvalidArgument);
  auto targets = c.targets;
  targets[0].z_pseudo = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(SceneObjective(targets, c.ground, c.cam, LossWeights{}), MissingPseudoDepth);
}

TEST(SceneObjective, EmptySceneIsZero) {
  const SceneObjective obj({}, GroundEstimate{}, CameraIntrinsics{100, 50, 50, 100, 100},
                           LossWeights{});
  EXPECT_EQ(obj.value(std::span<const Cube>{}), 0.0);
  EXPECT_TRUE(obj.gradient(std::span<const Cube>{}).empty());
}

}  // namespace
}  // namespace weakcube
