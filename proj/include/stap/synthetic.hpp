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

#ifndef STAP_SYNTHETIC_HPP
#define STAP_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "stap/human.hpp"

namespace stap {

enum class MotionKind { kReachShelf, kReachTable, kArmSweep };

inline std::string to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::kReachShelf: return "reach-shelf";
    case MotionKind::kReachTable: return "reach-table";
    case MotionKind::kArmSweep: return "arm-sweep";
  }
  return "?";
}

inline MotionKind motion_kind_from_string(const std::string& s) {
  if (s == "reach-shelf") return MotionKind::kReachShelf;
  if (s == "reach-table") return MotionKind::kReachTable;
  if (s == "arm-sweep") return MotionKind::kArmSweep;
  throw InvalidInput("unknown synthetic motion kind: " + s);
}

/// Parametric upper-body motion. Each cycle ramps the moving arm(s) out by
/// `amplitude_deg` and back with cosine blends, holding the extreme for a
/// `dwell` fraction of the period. The human stands still for `start_delay`
/// seconds and after the last cycle.
struct SyntheticHumanParams {
  double period = 10.0;          // [s]
  int cycles = 2;
  double amplitude_deg = 45.0;
  double dwell = 0.0;            // fraction of the period spent at the extreme
  double dt = 0.1;               // [s]
  double start_delay = 0.0;      // [s]
  double tail = 0.0;             // [s] of rest appended after the last cycle
  Vec3 pelvis{1.3, 0.0, -0.55};  // [m]
  double yaw = M_PI;             // facing direction about +z; pi faces -x
  double arm_reach = 0.55;       // forward distance of the joined hands from the neck [m]
  double arm_drop = 0.0;         // vertical offset of the joined hands [m]
};

/// Eight-link upper body: spine, head, and for each side a shoulder, upper
/// arm and forearm.
inline Skeleton upper_body_skeleton() {
  return Skeleton{{-1, 0, 0, 2, 3, 0, 5, 6},
                  {"spine", "head", "r_shoulder", "r_upper_arm", "r_forearm", "l_shoulder",
                   "l_upper_arm", "l_forearm"}};
}

namespace detail {

inline Quat quat_toward(const Vec3& dir) {
  return Quat::FromTwoVectors(Vec3::UnitZ(), dir.normalized()).normalized();
}

/// Fraction in [0, 1] of the excursion at time t.
inline double excursion(double t, const SyntheticHumanParams& p) {
  const double local = t - p.start_delay;
  if (local <= 0.0 || local >= p.cycles * p.period) return 0.0;
  const double u = std::fmod(local, p.period) / p.period;
  const double ramp = 0.5 * (1.0 - std::clamp(p.dwell, 0.0, 0.99));
  if (u < ramp) return 0.5 * (1.0 - std::cos(M_PI * u / ramp));
  if (u <= 1.0 - ramp) return 1.0;
  return 0.5 * (1.0 - std::cos(M_PI * (1.0 - u) / ramp));
}

/// Rotates `from` toward `to` by `angle` along their great circle.
inline Vec3 rotate_toward(const Vec3& from, const Vec3& to, double angle) {
  const Vec3 a = from.normalized();
  Vec3 ortho = to.normalized() - a.dot(to.normalized()) * a;
  if (ortho.norm() < 1e-12) return a;
  ortho.normalize();
  return std::cos(angle) * a + std::sin(angle) * ortho;
}

}  // namespace detail

inline HumanMotionSequence generate_synthetic_human(MotionKind kind, const SyntheticHumanParams& p) {
  if (!(p.period > 0.0) || p.cycles < 0 || !(p.dt > 0.0) || p.start_delay < 0.0 || p.tail < 0.0) {
    throw InvalidInput("invalid synthetic human parameters");
  }
  const std::vector<double> lengths{0.55, 0.25, 0.2, 0.3, 0.3, 0.2, 0.3, 0.3};
  const std::vector<double> radii{0.14, 0.1, 0.05, 0.05, 0.045, 0.05, 0.05, 0.045};
  const Vec3 up = Vec3::UnitZ();
  const Vec3 forward(std::cos(p.yaw), std::sin(p.yaw), 0.0);
  const Vec3 left = up.cross(forward);
  const Vec3 neck = p.pelvis + lengths[0] * up;
  const Vec3 r_shoulder = neck - lengths[2] * left;
  const Vec3 l_shoulder = neck + lengths[5] * left;
  const double amplitude = p.amplitude_deg * M_PI / 180.0;

  // Rest directions of each arm.
  Vec3 r_rest;
  Vec3 l_rest;
  Vec3 r_target;
  if (kind == MotionKind::kArmSweep) {
    const Vec3 hands = neck + p.arm_reach * forward + p.arm_drop * up;
    r_rest = (hands - r_shoulder).normalized();
    l_rest = (hands - l_shoulder).normalized();
    r_target = up;
  } else {
    r_rest = (0.25 * forward - up).normalized();
    l_rest = (0.25 * forward - up).normalized();
    r_target = kind == MotionKind::kReachShelf ? (forward + 0.8 * up).normalized()
                                               : (0.7 * forward - 0.7 * left - 0.15 * up).normalized();
  }

  HumanMotionSequence seq;
  seq.skeleton = upper_body_skeleton();
  seq.dt = p.dt;
  const double t_end = p.start_delay + p.cycles * p.period + p.tail;
  const auto n = static_cast<long>(std::llround(t_end / p.dt));
  seq.samples.reserve(n + 1);
  for (long k = 0; k <= n; ++k) {
    HumanMotionSample s;
    s.t = static_cast<double>(k) * p.dt;
    s.pelvis = p.pelvis;
    s.link_lengths = lengths;
    s.link_radii = radii;
    const double angle = amplitude * detail::excursion(s.t, p);
    Vec3 r_dir = detail::rotate_toward(r_rest, r_target, angle);
    Vec3 l_dir = l_rest;
    if (kind == MotionKind::kArmSweep) l_dir = detail::rotate_toward(l_rest, -up, angle);
    s.link_quats = {detail::quat_toward(up),
                    detail::quat_toward(up),
                    detail::quat_toward(-left),
                    detail::quat_toward(r_dir),
                    detail::quat_toward(r_dir),
                    detail::quat_toward(left),
                    detail::quat_toward(l_dir),
                    detail::quat_toward(l_dir)};
    seq.samples.push_back(std::move(s));
  }
  return seq;
}

/// The same motion running `time_shift` seconds late (boundary poses held),
/// with the whole body displaced by a random horizontal offset of standard
/// deviation `jitter` meters.
inline HumanMotionSequence perturb_sequence(const HumanMotionSequence& seq, double time_shift, double jitter,
                                            std::uint64_t seed) {
  validate_sequence(seq);
  HumanMotionSequence out = seq;
  const std::size_t n = seq.samples.size();
  const double t0 = seq.t_start();
  for (std::size_t k = 0; k < n; ++k) {
    const double src_t = seq.samples[k].t - time_shift;
    const double u = std::clamp((src_t - t0) / seq.dt, 0.0, static_cast<double>(n - 1));
    const auto i = static_cast<std::size_t>(std::floor(u));
    const std::size_t j = std::min(i + 1, n - 1);
    const double f = u - static_cast<double>(i);
    const auto& a = seq.samples[i];
    const auto& b = seq.samples[j];
    auto& s = out.samples[k];
    s.pelvis = (1.0 - f) * a.pelvis + f * b.pelvis;
    for (std::size_t l = 0; l < s.link_quats.size(); ++l) {
      s.link_quats[l] = a.link_quats[l].slerp(f, b.link_quats[l]).normalized();
    }
  }
  if (jitter > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, jitter);
    const Vec3 offset(noise(rng), noise(rng), 0.0);
    for (auto& s : out.samples) s.pelvis += offset;
  }
  return out;
}

}  // namespace stap

#endif  // STAP_SYNTHETIC_HPP
