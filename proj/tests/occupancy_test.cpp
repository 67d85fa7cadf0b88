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

#include <random>

#include "stap/occupancy.hpp"
#include "test_util.hpp"

namespace stap {
namespace {

using testing::capsule_sample;
using testing::moving_capsule;
using testing::static_capsule;

// Every voxel center checked against every link, no bounding-box pruning.
VoxelSet brute_force_voxels(const std::vector<Vec3>& joints, const HumanMotionSample& s, const Skeleton& sk,
                            const VoxelGrid& g) {
  VoxelSet out;
  for (VoxelIndex v = 0; v < g.size(); ++v) {
    const Vec3 c = g.center(v);
    for (int l = 0; l < sk.links(); ++l) {
      const Vec3 a = joints[sk.start_joint(l)];
      const Vec3 d = joints[sk.end_joint(l)] - a;
      double u = d.squaredNorm() > 0 ? (c - a).dot(d) / d.squaredNorm() : 0.0;
      u = std::clamp(u, 0.0, 1.0);
      if ((c - (a + u * d)).norm() <= s.link_radii[l] + 1e-12) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

TEST(Voxelize, DegenerateLinkCoversOneVoxel) {
  const VoxelGrid g(Vec3::Zero(), 0.1, {5, 5, 5});
  const Skeleton sk{{-1}, {}};
  const HumanMotionSample s = capsule_sample(0, Vec3(0.25, 0.25, 0.25), Vec3::UnitZ(), 1.0, 0.01);
  const std::vector<Vec3> joints{Vec3(0.25, 0.25, 0.25), Vec3(0.25, 0.25, 0.25)};
  const VoxelSet got = voxelize_pose(joints, s, sk, g);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0], *g.index_of(Vec3(0.25, 0.25, 0.25)));
}

TEST(Voxelize, OutsideTheGridIsEmpty) {
  const VoxelGrid g(Vec3::Zero(), 0.1, {5, 5, 5});
  const Skeleton sk{{-1}, {}};
  const HumanMotionSample s = capsule_sample(0, Vec3(3, 3, 3), Vec3::UnitZ(), 0.5, 0.1);
  EXPECT_TRUE(voxelize_pose(human_forward_kinematics(s, sk), s, sk, g).empty());
}

TEST(Voxelize, MatchesBruteForceOracle) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  const VoxelGrid g(Vec3(-0.5, -0.5, -0.5), 0.05, {20, 20, 20});
  const Skeleton sk{{-1, 0, 0, 2}, {}};
  for (int trial = 0; trial < 20; ++trial) {
    HumanMotionSample s;
    s.pelvis = Vec3(u(rng), u(rng), u(rng));
    for (int l = 0; l < sk.links(); ++l) {
      s.link_quats.push_back(testing::random_unit_quat(rng));
      s.link_lengths.push_back(0.1 + 0.3 * std::abs(u(rng)));
      s.link_radii.push_back(0.02 + 0.1 * std::abs(u(rng)));
    }
    const auto joints = human_forward_kinematics(s, sk);
    EXPECT_EQ(voxelize_pose(joints, s, sk, g), brute_force_voxels(joints, s, sk, g));
  }
}

TEST(IntervalsFromSteps, Examples) {
  const std::vector<double> times{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const std::vector<int> run{1, 2, 3};
  EXPECT_EQ(intervals_from_steps(run, times), (IntervalList{{0.1, 0.3}}));
  const std::vector<int> tail{9, 10};
  EXPECT_EQ(intervals_from_steps(tail, times), (IntervalList{{0.9, kInfinity}}));
  const std::vector<int> two{2, 6, 7};
  EXPECT_EQ(intervals_from_steps(two, times), (IntervalList{{0.2, 0.2}, {0.6, 0.7}}));
  const std::vector<int> last_only{10};
  EXPECT_EQ(intervals_from_steps(last_only, times), (IntervalList{{1.0, kInfinity}}));
}

// A small capsule on a 1-D strip of voxels, placed by pelvis x at each sample.
OccupancyMap strip_map(const std::vector<double>& xs) {
  const VoxelGrid g(Vec3(0, -0.05, -0.05), 0.1, {10, 1, 1});
  const auto seq = moving_capsule(static_cast<int>(xs.size()), 0.1,
                                  [&](int k) { return Vec3(xs[k], 0, -0.02); }, Vec3::UnitZ(), 0.04, 0.01);
  return build_occupancy_map(seq, g);
}

TEST(OccupancyMap, IntervalAndLastPassExamples) {
  // Samples at t = 0.0 .. 1.0; the capsule sits in cell 2 at samples 1-3,
  // in cell 7 at samples 9-10, else in cell 5.
  std::vector<double> xs(11, 0.55);
  xs[1] = xs[2] = xs[3] = 0.25;
  xs[9] = xs[10] = 0.75;
  const auto map = strip_map(xs);
  ASSERT_EQ(map.intervals(2).size(), 1u);
  EXPECT_NEAR(map.intervals(2)[0].t_s, 0.1, 1e-12);
  EXPECT_NEAR(map.intervals(2)[0].t_f, 0.3, 1e-12);
  EXPECT_EQ(map.last_pass(2), kInfinity);
  ASSERT_EQ(map.intervals(7).size(), 1u);
  EXPECT_NEAR(map.intervals(7)[0].t_s, 0.9, 1e-12);
  EXPECT_EQ(map.intervals(7)[0].t_f, kInfinity);
  EXPECT_NEAR(map.last_pass(7), 0.9, 1e-12);
  ASSERT_EQ(map.intervals(5).size(), 2u);
  EXPECT_NEAR(map.intervals(5)[0].t_s, 0.0, 1e-12);
  EXPECT_NEAR(map.intervals(5)[0].t_f, 0.0, 1e-12);
  EXPECT_NEAR(map.intervals(5)[1].t_s, 0.4, 1e-12);
  EXPECT_NEAR(map.intervals(5)[1].t_f, 0.8, 1e-12);
  EXPECT_TRUE(map.intervals(0).empty());
}

TEST(OccupancyMap, QueryByPoint) {
  std::vector<double> xs(11, 0.55);
  xs[9] = xs[10] = 0.75;
  const auto map = strip_map(xs);
  const auto q = map.query(Vec3(0.72, 0.01, 0.0));
  ASSERT_EQ(q.intervals.size(), 1u);
  EXPECT_NEAR(q.last_pass, 0.9, 1e-12);
  const auto outside = map.query(Vec3(5, 5, 5));
  EXPECT_TRUE(outside.intervals.empty());
  EXPECT_EQ(outside.last_pass, kInfinity);
}

TEST(OccupancyMap, IntervalsAreSoundAndTight) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  const VoxelGrid g(Vec3(-0.5, -0.5, -0.5), 0.05, {20, 20, 20});
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3 p0(u(rng), u(rng), u(rng));
    const Vec3 vel(u(rng), u(rng), u(rng));
    const Vec3 dir(u(rng), u(rng), 0.5);
    const auto seq = moving_capsule(30, 0.1, [&](int k) { return Vec3(p0 + 0.1 * k * vel); }, dir, 0.2, 0.06);
    const auto map = build_occupancy_map(seq, g);
    std::vector<VoxelSet> occupied;
    for (const auto& s : seq.samples) {
      occupied.push_back(voxelize_pose(human_forward_kinematics(s, seq.skeleton), s, seq.skeleton, g));
    }
    for (VoxelIndex v = 0; v < g.size(); ++v) {
      const auto ivs = map.intervals(v);
      EXPECT_TRUE(is_sorted_disjoint(ivs));
      for (std::size_t k = 0; k < seq.samples.size(); ++k) {
        const bool occ = std::binary_search(occupied[k].begin(), occupied[k].end(), v);
        // Occupied samples lie inside an interval; free samples lie outside all.
        EXPECT_EQ(contains_time(ivs, seq.samples[k].t), occ) << "voxel " << v << " sample " << k;
      }
      const bool final_occ = std::binary_search(occupied.back().begin(), occupied.back().end(), v);
      if (final_occ) {
        EXPECT_TRUE(ivs.back().open_ended());
        EXPECT_EQ(map.last_pass(v), ivs.back().t_s);
      } else {
        EXPECT_EQ(map.last_pass(v), kInfinity);
      }
    }
  }
}

TEST(OccupancyMap, TwoHumansUnionPerVoxel) {
  const VoxelGrid g(Vec3(0, -0.05, -0.05), 0.1, {10, 1, 1});
  std::vector<double> xa(11, 0.95), xb(11, 0.95);
  xa[1] = xa[2] = 0.25;
  xb[2] = xb[3] = xb[4] = 0.25;
  xb[10] = 0.35;
  auto make = [](const std::vector<double>& xs) {
    return moving_capsule(11, 0.1, [&](int k) { return Vec3(xs[k], 0, -0.02); }, Vec3::UnitZ(), 0.04, 0.01);
  };
  const std::vector<HumanMotionSequence> humans{make(xa), make(xb)};
  const auto map = build_occupancy_map(humans, g);
  const auto iv = map.intervals(2);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_NEAR(iv[0].t_s, 0.1, 1e-12);
  EXPECT_NEAR(iv[0].t_f, 0.4, 1e-12);
  EXPECT_NEAR(map.last_pass(3), 1.0, 1e-12);
  EXPECT_EQ(map.tracks().size(), 2u);
}

TEST(OccupancyMap, TrackVelocitiesMatchPelvisMotion) {
  const Vec3 vel(0.3, -0.2, 0.1);
  const auto seq = moving_capsule(10, 0.1, [&](int k) { return Vec3(0.1 * k * vel); });
  const HumanPointTrack track(seq);
  for (std::size_t k = 0; k < track.frames().size(); ++k) {
    for (const Vec3& v : track.frames()[k].velocities) EXPECT_NEAR((v - vel).norm(), 0.0, 1e-12);
  }
  const auto mid = track.interpolated(0.45);
  EXPECT_NEAR((mid.points[0] - 0.45 * vel).norm(), 0.0, 1e-12);
  // After the prediction ends the human rests at its last pose.
  const auto after = track.nearest(5.0);
  EXPECT_NEAR(after.velocities[0].norm(), 0.0, 1e-15);
  EXPECT_NEAR((after.points[0] - 0.9 * vel).norm(), 0.0, 1e-12);
}

TEST(OccupancyMap, WarnsWhenHumanMissesTheGrid) {
  const VoxelGrid g(Vec3::Zero(), 0.1, {3, 3, 3});
  const auto map = build_occupancy_map(static_capsule(3, 0.1, Vec3(10, 10, 10)), g);
  ASSERT_EQ(map.warnings().size(), 1u);
  EXPECT_EQ(map.occupied_voxel_count(), 0u);
  EXPECT_TRUE(map.has_humans());
}

}  // namespace
}  // namespace stap
