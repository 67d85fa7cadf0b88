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

#ifndef STAP_OCCUPANCY_HPP
#define STAP_OCCUPANCY_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stap/human.hpp"
#include "stap/interval.hpp"
#include "stap/voxel_grid.hpp"

namespace stap {

/// Voxels whose centers lie within link_radius of a link's axis segment
/// (capsules, so joints are covered by the end caps). Out-of-grid voxels are
/// dropped.
inline VoxelSet voxelize_pose(const std::vector<Vec3>& joints, const HumanMotionSample& sample,
                              const Skeleton& skeleton, const VoxelGrid& grid) {
  VoxelSet voxels;
  for (int link = 0; link < skeleton.links(); ++link) {
    const Vec3& a = joints[skeleton.start_joint(link)];
    const Vec3& b = joints[skeleton.end_joint(link)];
    const double r = sample.link_radii[link];
    const Vec3 lo = a.cwiseMin(b) - Vec3::Constant(r);
    const Vec3 hi = a.cwiseMax(b) + Vec3::Constant(r);
    grid.for_each_cell_in_box(lo, hi, [&](int i, int j, int k) {
      if (squared_distance_to_segment(grid.center(i, j, k), a, b) <= r * r) {
        voxels.push_back(grid.linear(i, j, k));
      }
    });
  }
  sort_unique(voxels);
  return voxels;
}

/// Converts the ascending sample indices at which a voxel is occupied into
/// avoidance intervals: runs of consecutive indices become [first, last], and
/// a run ending on the final sample stays occupied forever.
inline IntervalList intervals_from_steps(std::span<const int> steps, std::span<const double> times) {
  IntervalList out;
  const int last_index = static_cast<int>(times.size()) - 1;
  std::size_t i = 0;
  while (i < steps.size()) {
    std::size_t j = i;
    while (j + 1 < steps.size() && steps[j + 1] == steps[j] + 1) ++j;
    const double t_s = times[steps[i]];
    const double t_f = steps[j] == last_index ? kInfinity : times[steps[j]];
    out.push_back({t_s, t_f});
    i = j + 1;
  }
  return out;
}

/// Human SSM points (joints and limb midpoints) of one predicted obstacle at
/// every sample, with finite-difference velocities.
class HumanPointTrack {
 public:
  struct Frame {
    std::vector<Vec3> points;
    std::vector<Vec3> velocities;
  };

  HumanPointTrack() = default;

  explicit HumanPointTrack(const HumanMotionSequence& seq) : t0_(seq.t_start()), dt_(seq.dt) {
    validate_sequence(seq);
    frames_.reserve(seq.samples.size());
    for (const auto& sample : seq.samples) {
      Frame f;
      f.points = human_ssm_points(human_forward_kinematics(sample, seq.skeleton), seq.skeleton);
      frames_.push_back(std::move(f));
    }
    const std::size_t n = frames_.size();
    for (std::size_t k = 0; k < n; ++k) {
      auto& f = frames_[k];
      f.velocities.assign(f.points.size(), Vec3::Zero());
      if (n == 1) continue;
      const std::size_t lo = k == 0 ? 0 : k - 1;
      const std::size_t hi = k + 1 == n ? k : k + 1;
      const double span = (hi - lo) * dt_;
      for (std::size_t p = 0; p < f.points.size(); ++p) {
        f.velocities[p] = (frames_[hi].points[p] - frames_[lo].points[p]) / span;
      }
    }
    resting_.points = frames_.back().points;
    resting_.velocities.assign(resting_.points.size(), Vec3::Zero());
    resting_start_.points = frames_.front().points;
    resting_start_.velocities.assign(resting_start_.points.size(), Vec3::Zero());
  }

  double t_start() const { return t0_; }
  double t_end() const { return t0_ + dt_ * static_cast<double>(frames_.size() - 1); }
  double dt() const { return dt_; }
  const std::vector<Frame>& frames() const { return frames_; }

  /// Sample nearest to t. Outside the predicted span the boundary pose
  /// persists and is reported at rest.
  const Frame& nearest(double t) const {
    const double half = 0.5 * dt_;
    if (t > t_end() + half) return resting_;
    if (t < t0_ - half) return resting_start_;
    const double idx = std::round((t - t0_) / dt_);
    const auto k = static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(frames_.size() - 1)));
    return frames_[k];
  }

  /// Linear interpolation between samples, used for the "actual" human at
  /// execution time.
  Frame interpolated(double t) const {
    if (t >= t_end()) return resting_;
    if (t <= t0_) return frames_.size() == 1 ? resting_ : frames_.front();
    const double u = (t - t0_) / dt_;
    const auto k = static_cast<std::size_t>(std::floor(u));
    const double s = u - static_cast<double>(k);
    const Frame& a = frames_[k];
    const Frame& b = frames_[std::min(k + 1, frames_.size() - 1)];
    Frame out;
    out.points.resize(a.points.size());
    out.velocities.resize(a.points.size());
    for (std::size_t p = 0; p < a.points.size(); ++p) {
      out.points[p] = (1.0 - s) * a.points[p] + s * b.points[p];
      out.velocities[p] = (b.points[p] - a.points[p]) / dt_;
    }
    return out;
  }

 private:
  double t0_ = 0.0;
  double dt_ = 0.1;
  std::vector<Frame> frames_;
  Frame resting_;
  Frame resting_start_;
};

struct VoxelQuery {
  std::span<const AvoidanceInterval> intervals;
  double last_pass = kInfinity;
};

/// Spatio-temporal occupancy of the workspace: per-voxel avoidance intervals
/// and last-pass times, plus the SSM point tracks of every predicted human.
/// Immutable once built.
class OccupancyMap {
 public:
  OccupancyMap() = default;
  explicit OccupancyMap(VoxelGrid grid)
      : grid_(std::move(grid)),
        intervals_(static_cast<std::size_t>(grid_.size())),
        last_pass_(static_cast<std::size_t>(grid_.size()), kInfinity) {}

  const VoxelGrid& grid() const { return grid_; }
  const std::vector<HumanPointTrack>& tracks() const { return tracks_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  bool has_humans() const { return !tracks_.empty(); }

  std::span<const AvoidanceInterval> intervals(VoxelIndex v) const { return intervals_[v]; }
  double last_pass(VoxelIndex v) const { return last_pass_[v]; }

  /// Avoidance data of the voxel containing p; out-of-grid points are free.
  VoxelQuery query(const Vec3& p) const {
    const auto idx = grid_.index_of(p);
    if (!idx) return {};
    return {intervals_[*idx], last_pass_[*idx]};
  }

  std::size_t occupied_voxel_count() const {
    return static_cast<std::size_t>(
        std::count_if(intervals_.begin(), intervals_.end(), [](const auto& l) { return !l.empty(); }));
  }

  /// Latest predicted sample time over all humans (-inf with no humans).
  double horizon() const {
    double t = -kInfinity;
    for (const auto& tr : tracks_) t = std::max(t, tr.t_end());
    return t;
  }

  /// Adds one predicted human. Its intervals are unioned into the voxels it
  /// touches.
  void add_obstacle(const HumanMotionSequence& seq) {
    validate_sequence(seq);
    const std::size_t n = seq.samples.size();
    std::vector<double> times(n);
    for (std::size_t k = 0; k < n; ++k) times[k] = seq.samples[k].t;

    std::vector<std::vector<int>> steps(static_cast<std::size_t>(grid_.size()));
    std::vector<VoxelIndex> touched;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& sample = seq.samples[k];
      const auto joints = human_forward_kinematics(sample, seq.skeleton);
      for (VoxelIndex v : voxelize_pose(joints, sample, seq.skeleton, grid_)) {
        if (steps[v].empty()) touched.push_back(v);
        steps[v].push_back(static_cast<int>(k));
      }
    }
    std::sort(touched.begin(), touched.end());
    for (VoxelIndex v : touched) {
      const IntervalList own = intervals_from_steps(steps[v], times);
      intervals_[v] = union_intervals(intervals_[v], own);
      const auto& merged = intervals_[v];
      last_pass_[v] = merged.back().open_ended() ? merged.back().t_s : kInfinity;
    }
    if (touched.empty()) {
      warnings_.push_back("human motion sequence never intersects the workspace grid");
    }
    tracks_.emplace_back(seq);
  }

 private:
  VoxelGrid grid_;
  std::vector<IntervalList> intervals_;
  std::vector<double> last_pass_;
  std::vector<HumanPointTrack> tracks_;
  std::vector<std::string> warnings_;
};

/// Builds the occupancy map of one or more predicted humans over grid.
inline OccupancyMap build_occupancy_map(std::span<const HumanMotionSequence> humans,
                                        const VoxelGrid& grid) {
  OccupancyMap map(grid);
  for (const auto& seq : humans) map.add_obstacle(seq);
  return map;
}

inline OccupancyMap build_occupancy_map(const HumanMotionSequence& human, const VoxelGrid& grid) {
  return build_occupancy_map(std::span<const HumanMotionSequence>(&human, 1), grid);
}

inline VoxelQuery query_voxel(const OccupancyMap& map, const Vec3& point) { return map.query(point); }

}  // namespace stap

#endif  // STAP_OCCUPANCY_HPP
