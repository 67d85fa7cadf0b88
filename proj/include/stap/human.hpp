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

#ifndef STAP_HUMAN_HPP
#define STAP_HUMAN_HPP

#include <cmath>
#include <string>
#include <vector>

#include "stap/common.hpp"

namespace stap {

/// Link tree of a human skeleton. Joint 0 is the pelvis; link i runs from
/// joint start_joint(i) to joint i + 1, where a link without a parent link
/// starts at the pelvis.
struct Skeleton {
  std::vector<int> parents;  // parent link index, -1 for links rooted at the pelvis
  std::vector<std::string> names;

  int links() const { return static_cast<int>(parents.size()); }
  int joints() const { return links() + 1; }
  int start_joint(int link) const { return parents[link] < 0 ? 0 : parents[link] + 1; }
  int end_joint(int link) const { return link + 1; }
};

/// One predicted human pose. Link orientations are absolute: the link axis is
/// link_quats[i] applied to +z.
struct HumanMotionSample {
  double t = 0.0;
  Vec3 pelvis = Vec3::Zero();
  std::vector<Quat> link_quats;
  std::vector<double> link_lengths;
  std::vector<double> link_radii;
};

struct HumanMotionSequence {
  Skeleton skeleton;
  double dt = 0.1;
  std::vector<HumanMotionSample> samples;

  double t_start() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }
};

inline constexpr double kQuatNormTolerance = 1e-9;
inline constexpr double kTimeSpacingTolerance = 1e-9;

/// Throws InvalidInput on out-of-range parents or a cycle in the link tree.
inline void validate_skeleton(const Skeleton& skeleton) {
  const int n = skeleton.links();
  if (n == 0) throw InvalidInput("skeleton has no links");
  if (!skeleton.names.empty() && static_cast<int>(skeleton.names.size()) != n) {
    throw InvalidInput("skeleton names do not match link count");
  }
  for (int i = 0; i < n; ++i) {
    const int p = skeleton.parents[i];
    if (p < -1 || p >= n) throw InvalidInput("skeleton parent index out of range");
  }
  // Walking up from any link must reach the pelvis in fewer than n steps.
  for (int i = 0; i < n; ++i) {
    int steps = 0;
    for (int cur = i; cur >= 0; cur = skeleton.parents[cur]) {
      if (++steps > n) throw InvalidInput("skeleton link tree contains a cycle");
    }
  }
}

inline void validate_sample(const HumanMotionSample& sample, const Skeleton& skeleton) {
  const auto n = static_cast<std::size_t>(skeleton.links());
  if (sample.link_quats.size() != n || sample.link_lengths.size() != n ||
      sample.link_radii.size() != n) {
    throw InvalidInput("human sample arrays do not match skeleton link count");
  }
  if (!sample.pelvis.allFinite() || !std::isfinite(sample.t)) {
    throw InvalidInput("human sample has non-finite pelvis or time");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(sample.link_quats[i].norm() - 1.0) > kQuatNormTolerance) {
      throw InvalidInput("human link quaternion is not unit norm (link " + std::to_string(i) + ")");
    }
    if (!(sample.link_lengths[i] > 0.0) || !(sample.link_radii[i] > 0.0)) {
      throw InvalidInput("human link length and radius must be positive");
    }
  }
}

inline void validate_sequence(const HumanMotionSequence& seq) {
  validate_skeleton(seq.skeleton);
  if (seq.samples.empty()) throw InvalidInput("human motion sequence is empty");
  if (!(seq.dt > 0.0)) throw InvalidInput("human motion dt must be positive");
  for (std::size_t k = 0; k < seq.samples.size(); ++k) {
    validate_sample(seq.samples[k], seq.skeleton);
    if (k > 0) {
      const double step = seq.samples[k].t - seq.samples[k - 1].t;
      if (std::abs(step - seq.dt) > kTimeSpacingTolerance) {
        throw InvalidInput("human samples are not uniformly spaced by dt");
      }
    }
  }
}

/// Joint positions of one pose; entry 0 is the pelvis, entry i + 1 the far end
/// of link i.
inline std::vector<Vec3> human_forward_kinematics(const HumanMotionSample& sample,
                                                  const Skeleton& skeleton) {
  validate_skeleton(skeleton);
  validate_sample(sample, skeleton);
  const int n = skeleton.links();
  std::vector<Vec3> joints(n + 1);
  std::vector<char> done(n, 0);
  joints[0] = sample.pelvis;
  // Links may be listed in any order; resolve each by walking to a solved
  // ancestor first.
  std::vector<int> chain;
  for (int i = 0; i < n; ++i) {
    chain.clear();
    for (int cur = i; cur >= 0 && !done[cur]; cur = skeleton.parents[cur]) chain.push_back(cur);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const int link = *it;
      const Vec3 axis = sample.link_quats[link] * Vec3::UnitZ();
      joints[skeleton.end_joint(link)] =
          joints[skeleton.start_joint(link)] + sample.link_lengths[link] * axis;
      done[link] = 1;
    }
  }
  return joints;
}

/// SSM evaluation points of a pose: every joint followed by every link
/// midpoint.
inline std::vector<Vec3> human_ssm_points(const std::vector<Vec3>& joints, const Skeleton& skeleton) {
  std::vector<Vec3> points = joints;
  points.reserve(joints.size() + skeleton.links());
  for (int i = 0; i < skeleton.links(); ++i) {
    points.push_back(0.5 * (joints[skeleton.start_joint(i)] + joints[skeleton.end_joint(i)]));
  }
  return points;
}

}  // namespace stap

#endif  // STAP_HUMAN_HPP
