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

#ifndef STAP_COST_HPP
#define STAP_COST_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "stap/interval.hpp"
#include "stap/occupancy.hpp"
#include "stap/robot.hpp"

namespace stap {

/// Avoidance intervals and last-pass time of a graph edge: the union and the
/// minimum over every voxel the edge sweeps.
struct EdgeAvoidance {
  IntervalList intervals;
  double last_pass = kInfinity;

  bool empty() const { return intervals.empty(); }
  friend bool operator==(const EdgeAvoidance&, const EdgeAvoidance&) = default;
};

/// Speed-and-separation monitoring parameters plus the time-padding and
/// discretization knobs of the edge cost.
struct SsmParams {
  double reaction_time = 0.15;   // T_r [s]
  double max_decel = 0.1;        // a_s [m/s^2]
  double min_distance = 0.2;     // protective distance [m]
  double ratio_threshold = 3.0;  // slowdown ratio that triggers the lookahead
  double lookahead = 1.0;        // [s]
  double dq_step = 0.05;         // cost integration spacing [rad]
  double t_pad = 0.2;            // slack after an avoidance interval [s]

  void validate() const {
    if (!(reaction_time > 0.0) || !(max_decel > 0.0) || !(min_distance > 0.0) ||
        !(ratio_threshold > 0.0) || !(lookahead > 0.0) || !(dq_step > 0.0) || !(t_pad > 0.0)) {
      throw InvalidInput("SSM parameters must all be strictly positive");
    }
  }
};

/// Departure from the parent, arrival at the child, and the SSM-adjusted
/// traversal time between them.
struct EdgeTiming {
  double t_p = 0.0;
  double t_c = 0.0;
  double duration = 0.0;
};

inline EdgeAvoidance avoidance_of_voxels(const OccupancyMap& map, std::span<const VoxelIndex> voxels) {
  EdgeAvoidance out;
  for (VoxelIndex v : voxels) {
    const auto ivs = map.intervals(v);
    out.intervals.insert(out.intervals.end(), ivs.begin(), ivs.end());
    out.last_pass = std::min(out.last_pass, map.last_pass(v));
  }
  normalize_intervals(out.intervals);
  return out;
}

inline EdgeAvoidance edge_avoidance(const OccupancyMap& map, const RobotModel& model,
                                    const Configuration& q_p, const Configuration& q_c, double dq) {
  return avoidance_of_voxels(map, swept_voxels(model, q_p, q_c, map.grid(), dq));
}

/// Minimum traversal time under the joint velocity limits.
inline double nominal_time(const RobotModel& model, const Configuration& q_p, const Configuration& q_c) {
  detail::check_dimension(model, q_p);
  detail::check_dimension(model, q_c);
  double t = 0.0;
  for (int i = 0; i < model.dof(); ++i) {
    t = std::max(t, std::abs(q_c[i] - q_p[i]) / model.joints[i].max_vel);
  }
  return t;
}

/// Largest speed of a robot point toward a human point at separation
/// distance D that still allows stopping before contact; zero inside the
/// protective distance.
inline double ssm_vmax(double distance, double human_speed, const SsmParams& p) {
  if (!(distance > p.min_distance)) return 0.0;
  const double brake = p.max_decel * p.reaction_time;
  return -brake - human_speed +
         std::sqrt(human_speed * human_speed + brake * brake + 2.0 * p.max_decel * distance);
}

/// Component of body point j's velocity toward human_point while moving
/// from q_p to q_c in `nominal` seconds. Returns 0 when the two points
/// coincide (the direction is undefined).
inline double robot_tangential_speed(const RobotModel& model, const Configuration& q,
                                     const Configuration& q_p, const Configuration& q_c, double nominal,
                                     const Vec3& human_point, int j) {
  if (!(nominal > 0.0)) throw InvalidInput("nominal edge time must be positive");
  const Vec3 p = fk_points(model, q)[j];
  const Vec3 sep = human_point - p;
  const double d = sep.norm();
  if (d == 0.0) return 0.0;
  const Vec3 v = jacobian_point(model, q, j) * ((q_c - q_p) / nominal);
  return v.dot(sep / d);
}

/// Worst slowdown ratio v_robot / v_max over all robot/human point pairs.
/// Pairs where the robot point is not approaching contribute nothing; an
/// approaching pair inside the protective distance makes the ratio infinite.
inline double ssm_ratio(const PointKinematics& robot, std::span<const Vec3> human_points,
                        std::span<const Vec3> human_velocities, const SsmParams& p) {
  double worst = 0.0;
  for (std::size_t j = 0; j < robot.positions.size(); ++j) {
    const Vec3& pj = robot.positions[j];
    const Vec3& vj = robot.velocities[j];
    for (std::size_t i = 0; i < human_points.size(); ++i) {
      const Vec3 sep = human_points[i] - pj;
      const double d = sep.norm();
      if (d == 0.0) {
        if (vj.squaredNorm() > 0.0) return kInfinity;
        continue;
      }
      const Vec3 u = sep / d;
      const double v_robot = vj.dot(u);
      if (v_robot <= 0.0) continue;
      const double v_human = std::max(0.0, -human_velocities[i].dot(u));
      const double v_max = ssm_vmax(d, v_human, p);
      if (v_max <= 0.0) return kInfinity;
      worst = std::max(worst, v_robot / v_max);
    }
  }
  return worst;
}

namespace detail {

/// Predicted SSM ratio at configuration kinematics `kin` using every human's
/// sample nearest to t.
inline double predicted_ratio(const OccupancyMap& map, const PointKinematics& kin, double t,
                              const SsmParams& p) {
  double worst = 0.0;
  for (const auto& track : map.tracks()) {
    const auto& frame = track.nearest(t);
    worst = std::max(worst, ssm_ratio(kin, frame.points, frame.velocities, p));
    if (std::isinf(worst)) break;
  }
  return worst;
}

inline double min_track_dt(const OccupancyMap& map) {
  double dt = kInfinity;
  for (const auto& track : map.tracks()) dt = std::min(dt, track.dt());
  return dt;
}

}  // namespace detail

/// Traversal time of q_p -> q_c departing at t_p, lengthened by the slowdowns
/// the SSM controller is predicted to impose. The edge is split into
/// segments of joint spacing <= dq_step; each segment's ratio is evaluated at
/// its midpoint configuration and nominal passing time, replaced by the best
/// ratio in [t, t + lookahead] (capped at last_pass) when it exceeds the
/// threshold, and floored at 1. Returns +inf when some segment cannot move.
inline double ssm_adjusted_time(const OccupancyMap& map, const RobotModel& model,
                                const Configuration& q_p, const Configuration& q_c, double t_p,
                                const SsmParams& p, double last_pass = kInfinity) {
  const double nominal = nominal_time(model, q_p, q_c);
  if (nominal == 0.0 || !map.has_humans()) return nominal;
  const auto configs = discretize_edge(q_p, q_c, p.dq_step);
  const auto segments = static_cast<int>(configs.size()) - 1;
  const Eigen::VectorXd qdot = (q_c - q_p) / nominal;
  const double window_step = detail::min_track_dt(map);
  double total = 0.0;
  for (int k = 0; k < segments; ++k) {
    const Configuration q = 0.5 * (configs[k] + configs[k + 1]);
    const double t_n = t_p + (k + 0.5) / segments * nominal;
    const PointKinematics kin = point_kinematics(model, q, qdot);
    double ratio = detail::predicted_ratio(map, kin, t_n, p);
    if (ratio > p.ratio_threshold) {
      const double window_end = std::min(t_n + p.lookahead, last_pass);
      for (double t = t_n + window_step; t <= window_end + 1e-12 && ratio > 1.0; t += window_step) {
        ratio = std::min(ratio, detail::predicted_ratio(map, kin, t, p));
      }
    }
    if (std::isinf(ratio)) return kInfinity;
    total += std::max(ratio, 1.0) * nominal / segments;
  }
  return total;
}

/// Earliest departure at or after t_arr_parent whose window [t_p, t_p +
/// duration] avoids every interval, padding t_pad after each interval that is
/// cleared. Empty when the edge is blocked for good.
inline std::optional<EdgeTiming> earliest_passage(const EdgeAvoidance& avoid, double t_arr_parent,
                                                  double duration, const SsmParams& p) {
  if (!std::isfinite(duration) || !std::isfinite(t_arr_parent)) return std::nullopt;
  double t_p = t_arr_parent;
  double t_c = t_p + duration;
  for (const auto& iv : avoid.intervals) {
    if (iv.t_f < t_p) continue;
    if (iv.t_s > t_c) break;
    if (iv.open_ended()) return std::nullopt;
    t_p = iv.t_f + p.t_pad;
    t_c = t_p + duration;
  }
  if (t_p > avoid.last_pass || t_c > avoid.last_pass) return std::nullopt;
  return EdgeTiming{t_p, t_c, duration};
}

inline constexpr int kMaxTimingRounds = 8;

/// Couples the departure-dependent SSM duration with the interval search:
/// re-evaluates the duration at each candidate departure until the passage
/// window no longer moves. An edge the SSM blocks entirely at a departure is
/// retried one lookahead later. Gives up after kMaxTimingRounds.
inline std::optional<EdgeTiming> timed_passage(const OccupancyMap& map, const RobotModel& model,
                                               const EdgeAvoidance& avoid, const Configuration& q_p,
                                               const Configuration& q_c, double t_arr_parent,
                                               const SsmParams& p) {
  double t = t_arr_parent;
  for (int round = 0; round < kMaxTimingRounds; ++round) {
    if (t > avoid.last_pass) return std::nullopt;
    const double duration = ssm_adjusted_time(map, model, q_p, q_c, t, p, avoid.last_pass);
    if (std::isinf(duration)) {
      t += p.lookahead;
      continue;
    }
    const auto timing = earliest_passage(avoid, t, duration, p);
    if (!timing) return std::nullopt;
    if (timing->t_p == t) return timing;
    t = timing->t_p;
  }
  return std::nullopt;
}

}  // namespace stap

#endif  // STAP_COST_HPP
