// Copyright 2026 The STAP Planner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stap/cost.hpp"
#include "test_util.hpp"

namespace stap {
namespace {

using testing::moving_capsule;
using testing::planar_2dof;
using testing::prismatic_1dof;
using testing::q1;
using testing::q2;

// Distance at which a static human (v_h = 0) allows exactly speed v.
double distance_for_speed(double v, const SsmParams& p) {
  const double b = p.max_decel * p.reaction_time;
  return v * (v + 2 * b) / (2 * p.max_decel);
}

SsmParams no_lookahead() {
  SsmParams p;
  p.ratio_threshold = kInfinity;
  p.dq_step = 1.0;
  return p;
}

TEST(EdgeAvoidance, UnionOverVoxels) {
  const VoxelGrid g(Vec3(0, -0.05, -0.05), 0.1, {10, 1, 1});
  // One human in cell 2 during [1, 2], the other in cell 3 during [1.5, 3];
  // both rest elsewhere otherwise.
  const auto seq = moving_capsule(41, 0.1, [](int k) {
    return k >= 10 && k <= 20 ? Vec3(0.25, 0, -0.02) : Vec3(0.95, 0, -0.02);
  }, Vec3::UnitZ(), 0.04, 0.01);
  const auto seq2 = moving_capsule(41, 0.1, [](int k) {
    return k >= 15 && k <= 30 ? Vec3(0.35, 0, -0.02) : Vec3(0.85, 0, -0.02);
  }, Vec3::UnitZ(), 0.04, 0.01);
  const std::vector<HumanMotionSequence> humans{seq, seq2};
  const auto map = build_occupancy_map(humans, g);
  const VoxelSet voxels{2, 3};
  const auto a = avoidance_of_voxels(map, voxels);
  ASSERT_EQ(a.intervals.size(), 1u);
  EXPECT_NEAR(a.intervals[0].t_s, 1.0, 1e-12);
  EXPECT_NEAR(a.intervals[0].t_f, 3.0, 1e-12);
  EXPECT_EQ(a.last_pass, kInfinity);
  const VoxelSet with_rest{2, 9};
  EXPECT_NEAR(avoidance_of_voxels(map, with_rest).last_pass, 2.1, 1e-12);
}

TEST(NominalTime, Examples) {
  const RobotModel m = planar_2dof();  // 0.6 rad/s on both joints
  EXPECT_NEAR(nominal_time(m, q2(0, 0), q2(1.2, -0.3)), 2.0, 1e-12);
  EXPECT_NEAR(nominal_time(m, q2(0.1, 0.1), q2(-0.2, 0.1)), 0.5, 1e-12);
  EXPECT_EQ(nominal_time(m, q2(0.4, 0.4), q2(0.4, 0.4)), 0.0);
}

TEST(SsmVmax, Examples) {
  const SsmParams p;
  EXPECT_NEAR(ssm_vmax(0.7, 0.0, p), -0.015 + std::sqrt(0.015 * 0.015 + 0.14), 1e-12);
  EXPECT_NEAR(ssm_vmax(0.7, 0.0, p), 0.35946, 1e-5);
  EXPECT_EQ(ssm_vmax(0.1, 0.0, p), 0.0);
  EXPECT_EQ(ssm_vmax(0.2, 0.0, p), 0.0);
  // A fast approaching human drives the bound toward zero.
  EXPECT_LT(ssm_vmax(0.7, 100.0, p), 1e-3);
}

TEST(SsmVmax, SweepMatchesClosedForm) {
  const SsmParams p;
  for (int i = 0; i < 1000; ++i) {
    const double d = 0.2 + 1e-6 + 3.0 * i / 1000.0;
    const double vh = 0.002 * i;
    const double b = 0.1 * 0.15;
    const double want = std::sqrt(vh * vh + b * b + 0.2 * d) - b - vh;
    EXPECT_NEAR(ssm_vmax(d, vh, p), want, 1e-9);
  }
}

TEST(SsmVmax, MonotoneInDistanceAndHumanSpeed) {
  const SsmParams p;
  for (int i = 1; i < 500; ++i) {
    const double d = 0.01 * i;
    EXPECT_LE(ssm_vmax(d, 0.3, p), ssm_vmax(d + 0.01, 0.3, p));
    EXPECT_GE(ssm_vmax(d, 0.3, p), ssm_vmax(d, 0.31, p));
    EXPECT_GE(ssm_vmax(d, 0.3, p), 0.0);
  }
}

TEST(TangentialSpeed, SignFollowsApproach) {
  const RobotModel m = planar_2dof();
  // Base rotation at 1 rad/s moves point 3 at (0.5, 0, 0) along +y at 0.5 m/s.
  const Configuration q = q2(0, 0), a = q2(0, 0), b = q2(1, 0);
  EXPECT_NEAR(robot_tangential_speed(m, q, a, b, 1.0, Vec3(0.5, 1, 0), 3), 0.5, 1e-12);
  EXPECT_NEAR(robot_tangential_speed(m, q, a, b, 1.0, Vec3(0.5, -1, 0), 3), -0.5, 1e-12);
  EXPECT_NEAR(robot_tangential_speed(m, q, a, b, 1.0, Vec3(1.5, 0, 0), 3), 0.0, 1e-12);
  EXPECT_EQ(robot_tangential_speed(m, q, a, b, 1.0, Vec3(0.5, 0, 0), 3), 0.0);
}

TEST(TangentialSpeed, MatchesDistanceRateOracle) {
  const RobotModel m = planar_2dof();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const Configuration a = q2(u(rng), u(rng));
    const Configuration b = q2(u(rng), u(rng));
    const double nominal = nominal_time(m, a, b);
    const Configuration q = a + 0.3 * (b - a);
    const Vec3 h(u(rng), u(rng), 0.2 * u(rng));
    const int j = trial % 8;
    const Configuration qdot = (b - a) / nominal;
    const double dt = 1e-6;
    auto dist = [&](double s) { return (h - fk_points(m, q + s * qdot)[j]).norm(); };
    const double approach = -(dist(dt) - dist(-dt)) / (2 * dt);
    EXPECT_NEAR(robot_tangential_speed(m, q, a, b, nominal, h, j), approach, 1e-6);
  }
}

// A one-point robot sliding along x at 1 m/s past one small capsule.
struct SliderScene {
  RobotModel robot = prismatic_1dof();
  VoxelGrid grid{Vec3(-1, -1, -1), 0.5, {20, 4, 4}};
};

TEST(SsmAdjustedTime, NoHumanGivesNominal) {
  SliderScene s;
  const OccupancyMap empty(s.grid);
  EXPECT_DOUBLE_EQ(ssm_adjusted_time(empty, s.robot, q1(0), q1(3), 0.0, no_lookahead()), 3.0);
}

TEST(SsmAdjustedTime, ConstantRatioTwoDoublesTheTime) {
  SliderScene s;
  const SsmParams p = no_lookahead();
  const double gap = distance_for_speed(0.5, p);
  // The human keeps `gap` ahead of the robot and moves away, so v_h = 0 and
  // v_max = 0.5 at every evaluation.
  const auto human = moving_capsule(41, 0.1, [&](int k) { return Vec3(0.1 * k + gap, 0, 0); }, Vec3::UnitX());
  const auto map = build_occupancy_map(human, s.grid);
  EXPECT_NEAR(ssm_adjusted_time(map, s.robot, q1(0), q1(3), 0.0, p), 6.0, 1e-6);
}

TEST(SsmAdjustedTime, RatiosOneThreeOne) {
  SliderScene s;
  const SsmParams p = no_lookahead();
  // Segments of 1 m are evaluated at t = 0.5, 1.5, 2.5 with the robot at
  // x = 0.5, 1.5, 2.5. The human is far away except at t = 1.5, where it
  // stands still at the distance giving v_max = 1/3.
  const double near_x = 1.5 + distance_for_speed(1.0 / 3.0, p);
  const auto human = moving_capsule(31, 0.1, [&](int k) { return Vec3(k == 15 ? near_x : 50.0, 0, 0); },
                                    Vec3::UnitX());
  const auto map = build_occupancy_map(human, s.grid);
  EXPECT_NEAR(ssm_adjusted_time(map, s.robot, q1(0), q1(3), 0.0, p), 5.0, 1e-6);
}

TEST(SsmAdjustedTime, LookaheadTakesTheBestRatioInTheWindow) {
  SliderScene s;
  SsmParams p = no_lookahead();
  p.ratio_threshold = 2.0;
  p.lookahead = 0.3;
  const double near_x = 1.5 + distance_for_speed(1.0 / 3.0, p);
  // The blocking pose lasts 0.2 s, so a lookahead of 0.3 s finds a clear pose.
  const auto human = moving_capsule(31, 0.1, [&](int k) { return Vec3(k >= 14 && k <= 16 ? near_x : 50.0, 0, 0); },
                                    Vec3::UnitX());
  const auto map = build_occupancy_map(human, s.grid);
  EXPECT_NEAR(ssm_adjusted_time(map, s.robot, q1(0), q1(3), 0.0, p), 3.0, 1e-6);
  p.lookahead = 0.1;
  EXPECT_GT(ssm_adjusted_time(map, s.robot, q1(0), q1(3), 0.0, p), 3.0 + 1e-3);
}

TEST(SsmAdjustedTime, NeverBelowNominal) {
  const RobotModel m = planar_2dof();
  const auto grid = VoxelGrid::covering(Vec3(-1.5, -1.5, -0.5), Vec3(1.5, 1.5, 0.5), 0.1);
  const auto human = moving_capsule(60, 0.1, [](int k) { return Vec3(0.9 - 0.01 * k, 0.2, -0.3); });
  const auto map = build_occupancy_map(human, grid);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const Configuration a = q2(u(rng), u(rng));
    const Configuration b = q2(u(rng), u(rng));
    const double t = std::abs(u(rng));
    EXPECT_GE(ssm_adjusted_time(map, m, a, b, t, SsmParams{}), nominal_time(m, a, b) - 1e-12);
  }
}

TEST(EarliestPassage, Examples) {
  SsmParams p;
  p.t_pad = 0.5;
  const EdgeAvoidance blocked{{{2.0, 3.0}}, kInfinity};
  const auto t = earliest_passage(blocked, 1.5, 1.0, p);
  ASSERT_TRUE(t.has_value());
  EXPECT_DOUBLE_EQ(t->t_p, 3.5);
  EXPECT_DOUBLE_EQ(t->t_c, 4.5);
  const auto before = earliest_passage(blocked, 0.0, 1.0, p);
  ASSERT_TRUE(before.has_value());
  EXPECT_DOUBLE_EQ(before->t_p, 0.0);
  const EdgeAvoidance forever{{{0.9, kInfinity}}, 0.9};
  EXPECT_FALSE(earliest_passage(forever, 0.0, 1.0, p).has_value());
  EXPECT_TRUE(earliest_passage(forever, 0.0, 0.5, p).has_value());
  EXPECT_FALSE(earliest_passage(blocked, 0.0, kInfinity, p).has_value());
}

TEST(EarliestPassage, WindowAvoidsEveryInterval) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  SsmParams p;
  for (int trial = 0; trial < 500; ++trial) {
    EdgeAvoidance a;
    for (int i = 0; i < 6; ++i) {
      const double s = u(rng);
      a.intervals.push_back({s, s + u(rng) / 10.0});
    }
    if (trial % 3 == 0) a.intervals.push_back({20.0 + u(rng), kInfinity});
    normalize_intervals(a.intervals);
    if (a.intervals.back().open_ended()) a.last_pass = a.intervals.back().t_s;
    const double start = u(rng) / 2.0;
    const double duration = u(rng) / 10.0;
    const auto t = earliest_passage(a, start, duration, p);
    if (!t) {
      EXPECT_TRUE(a.last_pass < kInfinity);
      continue;
    }
    EXPECT_GE(t->t_p, start);
    EXPECT_NEAR(t->t_c - t->t_p, duration, 1e-12);
    EXPECT_FALSE(any_overlap(a.intervals, t->t_p, t->t_c));
    EXPECT_LE(t->t_c, a.last_pass);
    // The departure is either immediate or right after a cleared interval.
    bool anchored = t->t_p == start;
    for (const auto& iv : a.intervals) anchored = anchored || t->t_p == iv.t_f + p.t_pad;
    EXPECT_TRUE(anchored);
  }
}

TEST(TimedPassage, WaitsOutTheBlockingPose) {
  SliderScene s;
  SsmParams p = no_lookahead();
  p.ratio_threshold = 2.0;
  p.lookahead = 1.0;
  // The human stands inside the protective distance of the first segment
  // until t = 2, then leaves. Departing at 0 or 0.5 the lookahead still sees
  // it; one lookahead later the segment clears at t = 2.1.
  const auto human = moving_capsule(41, 0.1, [](int k) { return Vec3(k <= 20 ? 0.6 : 50.0, 0, 0); }, Vec3::UnitX());
  const auto map = build_occupancy_map(human, s.grid);
  const EdgeAvoidance avoid{};
  const auto t = timed_passage(map, s.robot, avoid, q1(0), q1(3), 0.0, p);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(t->t_p, 1.0, 1e-12);
  EXPECT_NEAR(t->duration, ssm_adjusted_time(map, s.robot, q1(0), q1(3), t->t_p, p), 1e-12);
  EXPECT_TRUE(std::isfinite(t->duration));
}

}  // namespace
}  // namespace stap
