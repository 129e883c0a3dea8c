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
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "weakcube/eval3d.hpp"

namespace weakcube {
namespace {

OrientedBox unit_at(double x) { return OrientedBox{Vec3(x, 0, 5), Vec3(1, 1, 1), Mat3::Identity()}; }

// Pairs that overlap often enough for the sampling oracle to be tight.
std::pair<OrientedBox, OrientedBox> random_pair(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.3, 2.0), off(-0.6, 0.6);
  OrientedBox a{Vec3(off(rng), off(rng), 4 + off(rng)), Vec3(d(rng), d(rng), d(rng)),
                oracle::random_rotation(rng)};
  OrientedBox b{a.center + Vec3(off(rng), off(rng), off(rng)), Vec3(d(rng), d(rng), d(rng)),
                oracle::random_rotation(rng)};
  return {a, b};
}

double axis_aligned_iou(const OrientedBox& a, const OrientedBox& b) {
  double inter = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double lo = std::max(a.center[k] - a.dims[k] / 2, b.center[k] - b.dims[k] / 2);
    const double hi = std::min(a.center[k] + a.dims[k] / 2, b.center[k] + b.dims[k] / 2);
    inter *= std::max(0.0, hi - lo);
  }
  return inter / (a.dims.prod() + b.dims.prod() - inter);
}

TEST(Iou3d, Examples) {
  EXPECT_NEAR(iou3d(unit_at(0), unit_at(0)), 1.0, 1e-12);
  EXPECT_EQ(iou3d(unit_at(0), unit_at(3)), 0.0);
  EXPECT_NEAR(iou3d(unit_at(0), unit_at(0.5)), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(oracle::monte_carlo_iou(unit_at(0), unit_at(0.5), 1'000'000, 1), 1.0 / 3.0, 0.003);
  EXPECT_EQ(iou3d(unit_at(0), unit_at(1.0)), 0.0);  // face contact
}

TEST(Iou3d, RotatedIdenticalBoxes) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const OrientedBox b{Vec3(0.1, -0.2, 3), Vec3(0.4, 1.1, 0.7), oracle::random_rotation(rng)};
    EXPECT_NEAR(iou3d(b, b), 1.0, 1e-9);
  }
}

TEST(Iou3d, AgreesWithMonteCarlo) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto [a, b] = random_pair(rng);
    EXPECT_NEAR(iou3d(a, b), oracle::monte_carlo_iou(a, b, 1'000'000, 100 + i), 0.003) << i;
  }
}

TEST(Iou3d, AxisAlignedClosedForm) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.2, 2.0), c(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const OrientedBox a{Vec3(c(rng), c(rng), c(rng)), Vec3(d(rng), d(rng), d(rng)), Mat3::Identity()};
    const OrientedBox b{Vec3(c(rng), c(rng), c(rng)), Vec3(d(rng), d(rng), d(rng)), Mat3::Identity()};
    EXPECT_NEAR(iou3d(a, b), axis_aligned_iou(a, b), 1e-12);
  }
}

TEST(Iou3d, SymmetricBoundedAndRigidInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const auto [a, b] = random_pair(rng);
    const double ab = iou3d(a, b);
    EXPECT_NEAR(ab, iou3d(b, a), 1e-9);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    const Mat3 r = oracle::random_rotation(rng);
    const Vec3 s(t(rng), t(rng), t(rng));
    const OrientedBox a2{r * a.center + s, a.dims, r * a.rotation};
    const OrientedBox b2{r * b.center + s, b.dims, r * b.rotation};
    EXPECT_NEAR(iou3d(a2, b2), ab, 1e-9);
  }
}

TEST(Filter, Rules) {
  const CameraIntrinsics cam{260, 160, 120, 320, 240};
  const EvalConfig cfg;
  AnnotatedObject ok{"chair", unit_at(0), Box2D{100, 50, 150, 150}, 0.0, 0.0};
  EXPECT_TRUE(passes_filter(ok, cfg, cam));
  AnnotatedObject small = ok;
  small.box2d = Box2D{100, 100, 150, 112};  // 5% of 240
  EXPECT_FALSE(passes_filter(small, cfg, cam));
  AnnotatedObject trunc = ok;
  trunc.truncation = 0.5;
  EXPECT_FALSE(passes_filter(trunc, cfg, cam));
  AnnotatedObject occ = ok;
  occ.occlusion = 0.7;
  EXPECT_FALSE(passes_filter(occ, cfg, cam));
  AnnotatedObject edge = ok;
  edge.truncation = 0.33;
  edge.occlusion = 0.66;
  edge.box2d = Box2D{0, 0, 10, 15};  // exactly 6.25%
  EXPECT_TRUE(passes_filter(edge, cfg, cam));
  const std::vector<AnnotatedObject> all{ok, small, trunc, occ, edge};
  EXPECT_EQ(filter_objects(all, cfg, cam).size(), 2u);
}

TEST(EvalConfig, Validation) {
  EvalConfig c;
  EXPECT_NO_THROW(c.validate());
  ASSERT_EQ(c.thresholds.size(), 10u);
  EXPECT_DOUBLE_EQ(c.thresholds.front(), 0.05);
  EXPECT_DOUBLE_EQ(c.thresholds.back(), 0.5);
  c.thresholds = {0.3, 0.2};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.thresholds = {0.0, 0.5};
  EXPECT_THROW(c.validate(), InvalidArgument);
}

// Shift along x giving a target IoU with a unit cube: (1-x)/(1+x) = iou.
OrientedBox with_iou(double iou) { return unit_at((1.0 - iou) / (1.0 + iou)); }

TEST(Ap3d, HandComputedFixture) {
  const std::vector<GroundTruth> gts{{unit_at(0), "chair", 0, false}};
  const std::vector<Detection> dets{{with_iou(0.6), "chair", 0.9, 0},
                                    {unit_at(10), "chair", 0.5, 0}};
  ASSERT_NEAR(iou3d(dets[0].box, gts[0].box), 0.6, 1e-12);
  EvalConfig cfg;
  cfg.thresholds = {0.5};
  EXPECT_DOUBLE_EQ(ap3d(dets, gts, cfg).mean_ap, 1.0);
  cfg.thresholds = {0.7};
  EXPECT_DOUBLE_EQ(ap3d(dets, gts, cfg).mean_ap, 0.0);
}

TEST(Ap3d, InterpolatedEnvelope) {
  // Two GT; ranked TP, FP, TP: recall .5 .5 1, precision 1 .5 2/3.
  const std::vector<GroundTruth> gts{{unit_at(0), "bed", 0, false}, {unit_at(20), "bed", 0, false}};
  const std::vector<Detection> dets{{unit_at(0), "bed", 0.9, 0},
                                    {unit_at(40), "bed", 0.8, 0},
                                    {unit_at(20), "bed", 0.7, 0}};
  EvalConfig cfg;
  cfg.thresholds = {0.5};
  EXPECT_NEAR(ap3d(dets, gts, cfg).mean_ap, 0.5 * 1.0 + 0.5 * (2.0 / 3.0), 1e-12);
}

TEST(Ap3d, PerfectAndEmpty) {
  std::vector<GroundTruth> gts;
  std::vector<Detection> perfect;
  for (int i = 0; i < 5; ++i) {
    const std::string cls = i % 2 ? "table" : "chair";
    gts.push_back({unit_at(3.0 * i), cls, i % 3, false});
    perfect.push_back({unit_at(3.0 * i), cls, 0.1 + 0.1 * i, i % 3});
  }
  const EvalConfig cfg;
  const APReport r = ap3d(perfect, gts, cfg);
  EXPECT_DOUBLE_EQ(r.mean_ap, 1.0);
  for (double v : r.mean_ap_per_tau) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_EQ(r.per_class.size(), 2u);
  EXPECT_EQ(ap3d({}, gts, cfg).mean_ap, 0.0);
  EXPECT_EQ(ap3d(perfect, {}, cfg).mean_ap, 0.0);
}

TEST(Ap3d, DetectionsOnlyMatchTheirOwnImage) {
  const std::vector<GroundTruth> gts{{unit_at(0), "chair", 0, false}};
  const std::vector<Detection> dets{{unit_at(0), "chair", 0.9, 1}};
  EXPECT_EQ(ap3d(dets, gts, EvalConfig{}).mean_ap, 0.0);
}

TEST(Ap3d, IgnoredGroundTruthIsNeutral) {
  const std::vector<GroundTruth> gts{{unit_at(0), "chair", 0, false}, {unit_at(5), "chair", 0, true}};
  const std::vector<Detection> dets{{unit_at(5), "chair", 0.95, 0}, {unit_at(0), "chair", 0.9, 0}};
  EXPECT_DOUBLE_EQ(ap3d(dets, gts, EvalConfig{}).mean_ap, 1.0);
  // A class whose only GT is ignored does not enter the mean.
  const std::vector<GroundTruth> only_ignored{{unit_at(0), "lamp", 0, true}};
  EXPECT_TRUE(ap3d(dets, only_ignored, EvalConfig{}).per_class.empty());
}

std::vector<Detection> random_detections(std::mt19937_64& rng, std::vector<GroundTruth>& gts) {
  std::uniform_real_distribution<double> shift(0.0, 0.9), score(0.01, 1.0);
  std::vector<Detection> dets;
  for (int i = 0; i < 12; ++i) {
    const std::string cls = i % 3 ? "chair" : "sofa";
    gts.push_back({unit_at(5.0 * i), cls, 0, false});
    if (i % 4 != 3) dets.push_back({unit_at(5.0 * i + shift(rng)), cls, score(rng), 0});
    if (i % 5 == 0) dets.push_back({unit_at(5.0 * i + 2.0), cls, score(rng), 0});
  }
  return dets;
}

TEST(Ap3d, InvariantToMonotoneScoreTransforms) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<GroundTruth> gts;
    std::vector<Detection> dets = random_detections(rng, gts);
    const double base = ap3d(dets, gts, EvalConfig{}).mean_ap;
    for (auto& d : dets) d.score = std::exp(3.0 * d.score) / 100.0;
    EXPECT_DOUBLE_EQ(ap3d(dets, gts, EvalConfig{}).mean_ap, base);
    for (auto& d : dets) d.score = std::sqrt(d.score);
    EXPECT_DOUBLE_EQ(ap3d(dets, gts, EvalConfig{}).mean_ap, base);
  }
}

TEST(Ap3d, LowestFalsePositiveNeverHelpsTruePositiveNeverHurts) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<GroundTruth> gts;
    const std::vector<Detection> dets = random_detections(rng, gts);
    const double base = ap3d(dets, gts, EvalConfig{}).mean_ap;

    std::vector<Detection> with_fp = dets;
    with_fp.push_back({unit_at(500), "chair", 1e-6, 0});
    EXPECT_LE(ap3d(with_fp, gts, EvalConfig{}).mean_ap, base);

    // An exact hit on an undetected GT, at any score.
    std::vector<Detection> with_tp = dets;
    with_tp.push_back({unit_at(15.0), "sofa", 0.5, 0});  // i = 3 has no detection
    EXPECT_GE(ap3d(with_tp, gts, EvalConfig{}).mean_ap, base);
  }
}

}  // namespace
}  // namespace weakcube
