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

#include "stap/planner.hpp"
#include "stap/timing.hpp"
#include "test_util.hpp"

namespace stap {
namespace {

using testing::planar_2dof;
using testing::prismatic_1dof;
using testing::q1;
using testing::q2;

PathSolution path_of(const std::vector<Configuration>& wps, const std::vector<EdgeTiming>& timings) {
  PathSolution p;
  p.waypoints = wps;
  p.timings = timings;
  p.estimated_duration = timings.empty() ? 0.0 : timings.back().t_c;
  return p;
}

const std::vector<Configuration> kWaypoints{q2(0, 0), q2(0.6, 0.3), q2(0.6, -0.9), q2(-0.3, -0.9)};

TEST(ParameterizeStap, FreeSpaceRunsAtNominalSpeed) {
  const RobotModel m = planar_2dof();
  const OccupancyMap map(VoxelGrid::covering(Vec3(-1, -1, -0.1), Vec3(1, 1, 0.1), 0.1));
  const StapEdgeModel model(map, m, SsmParams{});
  const auto timings = time_waypoints(model, kWaypoints);
  ASSERT_TRUE(timings.has_value());
  const auto traj = parameterize_stap(path_of(kWaypoints, *timings));
  EXPECT_EQ(traj.mode, TimingMode::kStapPt);
  EXPECT_EQ(traj.initial_wait, 0.0);
  // Nominal times 1.0, 2.0 and 1.5 s at 0.6 rad/s.
  const std::vector<double> want{0.0, 1.0, 3.0, 4.5};
  ASSERT_EQ(traj.arrival_times.size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) EXPECT_NEAR(traj.arrival_times[k], want[k], 1e-12);
  EXPECT_NEAR(traj.velocity_limits[1][1], 0.6, 1e-12);
}

TEST(ParameterizeStap, DelaysBecomeInitialWaitAndSlowerConnections) {
  const RobotModel m = planar_2dof();
  const auto traj = parameterize_stap(path_of(kWaypoints, {{0.5, 1.5, 1.0}, {2.0, 4.0, 2.0}, {4.0, 5.5, 1.5}}));
  EXPECT_DOUBLE_EQ(traj.initial_wait, 0.5);
  EXPECT_EQ(traj.arrival_times, (std::vector<double>{0.5, 2.0, 4.0, 5.5}));
  // The first connection stretches over the wait before the second departure.
  EXPECT_NEAR(traj.velocity_limits[0][0], 0.6 / 1.5, 1e-12);
  for (const auto& v : traj.velocity_limits) {
    for (int i = 0; i < m.dof(); ++i) EXPECT_LE(v[i], m.joints[i].max_vel + 1e-12);
  }
  EXPECT_TRUE(traj.at(0.2).isApprox(kWaypoints[0]));
  EXPECT_TRUE(traj.at(1.25).isApprox(q2(0.3, 0.15)));
  EXPECT_TRUE(traj.at(99).isApprox(kWaypoints.back()));
}

TEST(ParameterizeStap, RejectsInconsistentPaths) {
  EXPECT_THROW(parameterize_stap(path_of(kWaypoints, {{0, 1, 1}, {0.5, 2, 1.5}, {2, 3, 1}})), ConsistencyError);
  EXPECT_THROW(parameterize_stap(path_of(kWaypoints, {{0, 1, 1}})), ConsistencyError);
  EXPECT_THROW(parameterize_stap(path_of(kWaypoints, {{0, 1, 1}, {1, 1, 0}, {1, 2, 1}})), ConsistencyError);
}

TEST(ParameterizeFast, SumsNominalTimesWithoutWaiting) {
  const RobotModel m = planar_2dof();
  const auto path = path_of(kWaypoints, {{0.5, 1.5, 1.0}, {2.0, 4.0, 2.0}, {4.0, 5.5, 1.5}});
  const auto fast = parameterize_fast(path, m);
  EXPECT_EQ(fast.mode, TimingMode::kFastRetiming);
  EXPECT_EQ(fast.initial_wait, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < kWaypoints.size(); ++k) total += nominal_time(m, kWaypoints[k], kWaypoints[k + 1]);
  EXPECT_NEAR(fast.duration(), total, 1e-12);
  EXPECT_LE(fast.duration(), parameterize_stap(path).duration());
  EXPECT_THROW(parameterize_fast(path_of({q2(0, 0), q2(0, 0)}, {{0, 1, 1}}), m), ConsistencyError);
}

TEST(ParameterizeStap, SingleWaypointIsAnEmptyTrajectory) {
  const auto traj = parameterize_stap(path_of({q2(0, 0)}, {}));
  EXPECT_EQ(traj.connections(), 0);
  EXPECT_EQ(traj.duration(), 0.0);
}

TEST(TimingMode, NamesRoundTrip) {
  EXPECT_EQ(timing_mode_from_string(to_string(TimingMode::kStapPt)), TimingMode::kStapPt);
  EXPECT_EQ(timing_mode_from_string(to_string(TimingMode::kFastRetiming)), TimingMode::kFastRetiming);
  EXPECT_THROW(timing_mode_from_string("teleport"), InvalidInput);
}

TEST(ReplayViolations, CatchesATrajectoryTimedThroughTheHuman) {
  const RobotModel m = prismatic_1dof();
  const VoxelGrid g(Vec3(0, -0.05, -0.05), 0.1, {10, 1, 1});
  // Cell 5 is occupied during [1, 2].
  const auto human = testing::moving_capsule(31, 0.1, [](int k) {
    return k >= 10 && k <= 20 ? Vec3(0.55, 0, -0.02) : Vec3(0.95, 0, -0.02);
  }, Vec3::UnitZ(), 0.04, 0.01);
  const auto map = build_occupancy_map(human, g);
  const std::vector<Configuration> wps{q1(0.05), q1(0.85)};
  const auto early = parameterize_stap(path_of(wps, {{0.0, 1.6, 1.6}}));
  EXPECT_FALSE(replay_violations(early, m, map).empty());
  const auto waited = parameterize_stap(path_of(wps, {{2.1, 2.9, 0.8}}));
  const auto v = replay_violations(waited, m, map);
  EXPECT_TRUE(v.empty()) << v.front().t;
}

}  // namespace
}  // namespace stap
