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

#ifndef STAP_EXECUTION_HPP
#define STAP_EXECUTION_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "stap/cost.hpp"
#include "stap/timing.hpp"

namespace stap {

/// Minimum distance between any human point and any robot body point.
inline double separation_distance(const RobotModel& model, const Configuration& q,
                                  std::span<const Vec3> human_points) {
  if (human_points.empty()) throw InvalidInput("human point set is empty");
  double best = kInfinity;
  for (const Vec3& p : fk_points(model, q)) {
    for (const Vec3& h : human_points) best = std::min(best, (h - p).squaredNorm());
  }
  return std::sqrt(best);
}

struct ExecutionOptions {
  double tick = 0.01;            // [s]
  double timeout_factor = 10.0;  // deadlock after timeout_factor * planned duration
  double min_timeout = 10.0;     // [s], for near-zero planned durations
  bool record_log = false;
};

struct TickRecord {
  double t = 0.0;
  Configuration q;
  double min_separation = kInfinity;
  double speed_scale = 1.0;
};

struct ExecutionResult {
  double planned_duration = 0.0;
  double actual_duration = 0.0;
  double avg_separation = kInfinity;  // mean over ticks of the min human-robot distance
  double min_separation = kInfinity;
  double stop_time = 0.0;             // time the controller held the robot at zero speed
  double estimation_error = 0.0;      // (actual - planned) / planned
  bool deadlocked = false;
  std::vector<TickRecord> log;
};

/// Speed scale the SSM controller applies to the planned connection
/// velocity: min over point pairs of v_max / v_robot, clamped to [0, 1].
/// Pairs where the robot point is not approaching do not constrain.
inline double ssm_speed_scale(const PointKinematics& robot, std::span<const Vec3> human_points,
                              std::span<const Vec3> human_velocities, const SsmParams& p) {
  const double ratio = ssm_ratio(robot, human_points, human_velocities, p);
  if (ratio <= 1.0) return 1.0;
  if (std::isinf(ratio)) return 0.0;
  return 1.0 / ratio;
}

/// Runs the trajectory against the actual humans with the SSM controller in
/// the loop. Progress along each connection is slowed uniformly, so the
/// joint-space path never changes; a throttled robot falls behind schedule
/// and does not catch up.
inline ExecutionResult execute(const TimedTrajectory& traj, const RobotModel& model,
                               std::span<const HumanMotionSequence> actual_humans, const SsmParams& ssm,
                               const ExecutionOptions& opts = {}) {
  if (!(opts.tick > 0.0)) throw InvalidInput("execution tick must be positive");
  if (traj.waypoints.empty()) throw InvalidInput("trajectory has no waypoints");
  std::vector<HumanPointTrack> tracks;
  tracks.reserve(actual_humans.size());
  for (const auto& h : actual_humans) tracks.emplace_back(h);

  ExecutionResult res;
  res.planned_duration = traj.duration();
  const double timeout = std::max(opts.min_timeout, opts.timeout_factor * res.planned_duration);

  std::vector<Vec3> h_points;
  std::vector<Vec3> h_vels;
  auto gather_humans = [&](double t) {
    h_points.clear();
    h_vels.clear();
    for (const auto& tr : tracks) {
      const auto f = tr.interpolated(t);
      h_points.insert(h_points.end(), f.points.begin(), f.points.end());
      h_vels.insert(h_vels.end(), f.velocities.begin(), f.velocities.end());
    }
  };

  double sep_sum = 0.0;
  long ticks = 0;
  auto record = [&](double t, const Configuration& q, double scale) {
    double sep = kInfinity;
    if (!h_points.empty()) sep = separation_distance(model, q, h_points);
    res.min_separation = std::min(res.min_separation, sep);
    sep_sum += sep;
    ++ticks;
    if (opts.record_log) res.log.push_back({t, q, sep, scale});
  };

  const int n_conn = traj.connections();
  int k = 0;       // current connection
  double s = 0.0;  // progress along it, [0, 1]
  double t = 0.0;
  bool done = n_conn <= 0;
  if (done) res.actual_duration = 0.0;

  while (!done) {
    gather_humans(t);
    if (t < traj.initial_wait) {
      record(t, traj.waypoints.front(), 0.0);
      t = std::min(t + opts.tick, traj.initial_wait);
      continue;
    }
    if (t > timeout) {
      res.deadlocked = true;
      res.actual_duration = t;
      break;
    }
    const Configuration& a = traj.waypoints[k];
    const Configuration& b = traj.waypoints[k + 1];
    const double seg_time = traj.arrival_times[k + 1] - traj.arrival_times[k];
    const Eigen::VectorXd qdot = (b - a) / seg_time;
    const Configuration q = a + s * (b - a);
    double scale = 1.0;
    if (!h_points.empty()) scale = ssm_speed_scale(point_kinematics(model, q, qdot), h_points, h_vels, ssm);
    record(t, q, scale);
    if (scale == 0.0) {
      res.stop_time += opts.tick;
      t += opts.tick;
      continue;
    }
    // Advance; a connection finishing mid-tick hands the rest of the tick to
    // the next one at the same scale.
    double budget = opts.tick;
    while (budget > 0.0) {
      const double seg = traj.arrival_times[k + 1] - traj.arrival_times[k];
      const double needed = (1.0 - s) * seg / scale;
      if (needed > budget) {
        s += budget * scale / seg;
        t += budget;
        budget = 0.0;
      } else {
        t += needed;
        budget -= needed;
        s = 0.0;
        if (++k == n_conn) {
          done = true;
          res.actual_duration = t;
          break;
        }
      }
    }
  }
  res.avg_separation = ticks > 0 && std::isfinite(sep_sum) ? sep_sum / static_cast<double>(ticks) : kInfinity;
  res.estimation_error = res.planned_duration > 0.0
                             ? (res.actual_duration - res.planned_duration) / res.planned_duration
                             : 0.0;
  return res;
}

}  // namespace stap

#endif  // STAP_EXECUTION_HPP
