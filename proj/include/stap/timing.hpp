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

#ifndef STAP_TIMING_HPP
#define STAP_TIMING_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "stap/cost.hpp"
#include "stap/planner.hpp"

namespace stap {

enum class TimingMode { kStapPt, kFastRetiming };

inline std::string to_string(TimingMode mode) {
  return mode == TimingMode::kStapPt ? "stap-pt" : "fast-retiming";
}

inline TimingMode timing_mode_from_string(const std::string& s) {
  if (s == "stap-pt") return TimingMode::kStapPt;
  if (s == "fast-retiming" || s == "fast") return TimingMode::kFastRetiming;
  throw InvalidInput("unknown timing mode: " + s);
}

/// Waypoints with arrival times and constant per-connection joint
/// velocities. The robot holds the first waypoint until initial_wait.
struct TimedTrajectory {
  TimingMode mode = TimingMode::kStapPt;
  std::vector<Configuration> waypoints;
  std::vector<double> arrival_times;           // arrival_times[0] == initial_wait
  std::vector<Eigen::VectorXd> velocity_limits;  // one per connection, |dq| / dt
  double initial_wait = 0.0;

  int connections() const { return static_cast<int>(waypoints.size()) - 1; }
  double duration() const { return arrival_times.empty() ? 0.0 : arrival_times.back(); }

  /// Planned configuration at time t.
  Configuration at(double t) const {
    if (t <= arrival_times.front()) return waypoints.front();
    if (t >= arrival_times.back()) return waypoints.back();
    const auto it = std::upper_bound(arrival_times.begin(), arrival_times.end(), t);
    const auto k = static_cast<std::size_t>(std::distance(arrival_times.begin(), it)) - 1;
    const double s = (t - arrival_times[k]) / (arrival_times[k + 1] - arrival_times[k]);
    return waypoints[k] + s * (waypoints[k + 1] - waypoints[k]);
  }
};

namespace detail {

inline Eigen::VectorXd connection_velocity(const Configuration& a, const Configuration& b, double dt) {
  return ((b - a) / dt).cwiseAbs();
}

}  // namespace detail

/// Timing straight from the planner's passage windows. Each connection runs
/// at the constant velocity that reaches its end exactly when the next
/// connection departs, so a delayed departure slows the approach instead of
/// parking next to the human; only the start waypoint is held.
inline TimedTrajectory parameterize_stap(const PathSolution& path) {
  if (path.waypoints.size() != path.timings.size() + 1) {
    throw ConsistencyError("path has " + std::to_string(path.waypoints.size()) + " waypoints but " +
                           std::to_string(path.timings.size()) + " timings");
  }
  TimedTrajectory traj;
  traj.mode = TimingMode::kStapPt;
  traj.waypoints = path.waypoints;
  if (path.timings.empty()) {
    traj.arrival_times = {0.0};
    return traj;
  }
  for (std::size_t k = 0; k < path.timings.size(); ++k) {
    const auto& e = path.timings[k];
    if (!(e.t_c > e.t_p) || e.t_p < 0.0) throw ConsistencyError("edge timing window is empty");
    if (k > 0 && e.t_p < path.timings[k - 1].t_c - 1e-9) {
      throw ConsistencyError("edge timings do not chain at connection " + std::to_string(k));
    }
  }
  traj.initial_wait = path.timings.front().t_p;
  traj.arrival_times.push_back(traj.initial_wait);
  for (std::size_t k = 1; k < path.timings.size(); ++k) {
    traj.arrival_times.push_back(std::max(path.timings[k].t_p, path.timings[k - 1].t_c));
  }
  traj.arrival_times.push_back(path.timings.back().t_c);
  for (int k = 0; k < traj.connections(); ++k) {
    traj.velocity_limits.push_back(detail::connection_velocity(
        traj.waypoints[k], traj.waypoints[k + 1], traj.arrival_times[k + 1] - traj.arrival_times[k]));
  }
  return traj;
}

/// As-fast-as-possible retiming of the same waypoints: every connection at
/// its nominal time, no waiting. Safety is left to the runtime SSM controller.
inline TimedTrajectory parameterize_fast(const PathSolution& path, const RobotModel& model) {
  TimedTrajectory traj;
  traj.mode = TimingMode::kFastRetiming;
  traj.waypoints = path.waypoints;
  traj.arrival_times.push_back(0.0);
  for (std::size_t k = 0; k + 1 < path.waypoints.size(); ++k) {
    const double dt = nominal_time(model, path.waypoints[k], path.waypoints[k + 1]);
    if (!(dt > 0.0)) throw ConsistencyError("path repeats a waypoint");
    traj.arrival_times.push_back(traj.arrival_times.back() + dt);
    traj.velocity_limits.push_back(detail::connection_velocity(path.waypoints[k], path.waypoints[k + 1], dt));
  }
  return traj;
}

inline TimedTrajectory parameterize(TimingMode mode, const PathSolution& path, const RobotModel& model) {
  return mode == TimingMode::kStapPt ? parameterize_stap(path) : parameterize_fast(path, model);
}

/// A body-point voxel found occupied while the trajectory passes through it.
struct ReplayViolation {
  double t = 0.0;
  VoxelIndex voxel = 0;
};

/// Samples the trajectory every `dt` seconds (and at every waypoint time) and
/// reports robot body-point voxels that are inside an avoidance interval at
/// that instant.
inline std::vector<ReplayViolation> replay_violations(const TimedTrajectory& traj, const RobotModel& model,
                                                      const OccupancyMap& map, double dt = 0.01) {
  std::vector<double> times;
  for (double t = 0.0; t < traj.duration(); t += dt) times.push_back(t);
  times.insert(times.end(), traj.arrival_times.begin(), traj.arrival_times.end());
  std::sort(times.begin(), times.end());
  std::vector<ReplayViolation> out;
  VoxelSet voxels;
  for (double t : times) {
    voxels.clear();
    const auto points = fk_points(model, traj.at(t));
    for (std::size_t j = 0; j < points.size(); ++j) {
      add_sphere_voxels(map.grid(), points[j], model.body_points[j].radius, voxels);
    }
    sort_unique(voxels);
    for (VoxelIndex v : voxels) {
      if (contains_time(map.intervals(v), t)) out.push_back({t, v});
    }
  }
  return out;
}

}  // namespace stap

#endif  // STAP_TIMING_HPP
