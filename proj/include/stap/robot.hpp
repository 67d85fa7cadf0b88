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

#ifndef STAP_ROBOT_HPP
#define STAP_ROBOT_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "stap/common.hpp"
#include "stap/voxel_grid.hpp"

namespace stap {

enum class JointType { kRevolute, kPrismatic };

/// One actuated joint of a serial chain. The joint frame is the parent link
/// frame composed with `origin`; the joint moves about (or along) `axis`
/// expressed in that frame. Link i is the child of joint i.
struct Joint {
  std::string name;
  JointType type = JointType::kRevolute;
  Eigen::Isometry3d origin = Eigen::Isometry3d::Identity();
  Vec3 axis = Vec3::UnitZ();
  double lower = -M_PI;
  double upper = M_PI;
  double max_vel = 1.0;
};

/// Collision/SSM sample point rigidly attached to a link.
struct BodyPoint {
  int link = 0;
  Vec3 offset = Vec3::Zero();
  double radius = 0.0;
};

struct RobotModel {
  std::string name;
  Eigen::Isometry3d base = Eigen::Isometry3d::Identity();
  std::vector<Joint> joints;
  std::vector<BodyPoint> body_points;
  std::map<std::string, std::vector<double>> velocity_presets;

  int dof() const { return static_cast<int>(joints.size()); }

  Configuration lower() const {
    Configuration v(dof());
    for (int i = 0; i < dof(); ++i) v[i] = joints[i].lower;
    return v;
  }
  Configuration upper() const {
    Configuration v(dof());
    for (int i = 0; i < dof(); ++i) v[i] = joints[i].upper;
    return v;
  }
  Eigen::VectorXd max_vel() const {
    Eigen::VectorXd v(dof());
    for (int i = 0; i < dof(); ++i) v[i] = joints[i].max_vel;
    return v;
  }

  bool within_limits(const Configuration& q, double tol = 1e-12) const {
    if (q.size() != dof()) return false;
    for (int i = 0; i < dof(); ++i) {
      if (q[i] < joints[i].lower - tol || q[i] > joints[i].upper + tol) return false;
    }
    return true;
  }

  void apply_velocity_preset(const std::string& preset) {
    const auto it = velocity_presets.find(preset);
    if (it == velocity_presets.end()) throw InvalidInput("unknown velocity preset: " + preset);
    if (static_cast<int>(it->second.size()) != dof()) {
      throw InvalidInput("velocity preset size does not match dof: " + preset);
    }
    for (int i = 0; i < dof(); ++i) joints[i].max_vel = it->second[i];
  }

  void validate() const {
    if (dof() < 1) throw InvalidInput("robot model needs at least one joint");
    std::vector<int> per_link(dof(), 0);
    for (const auto& j : joints) {
      if (!(j.max_vel > 0.0)) throw InvalidInput("joint max velocity must be positive: " + j.name);
      if (!(j.lower < j.upper)) throw InvalidInput("joint limits must satisfy min < max: " + j.name);
      if (std::abs(j.axis.norm() - 1.0) > 1e-9) throw InvalidInput("joint axis must be unit: " + j.name);
    }
    for (const auto& p : body_points) {
      if (p.link < 0 || p.link >= dof()) throw InvalidInput("body point link index out of range");
      if (p.radius < 0.0) throw InvalidInput("body point radius must be non-negative");
      ++per_link[p.link];
    }
    for (int i = 0; i < dof(); ++i) {
      if (per_link[i] == 0) throw InvalidInput("link " + std::to_string(i) + " has no body point");
    }
  }
};

namespace detail {

inline void check_dimension(const RobotModel& model, const Configuration& q) {
  if (q.size() != model.dof()) {
    throw InvalidInput("configuration has dimension " + std::to_string(q.size()) + ", model has " +
                       std::to_string(model.dof()));
  }
}

inline Eigen::Isometry3d joint_motion(const Joint& joint, double value) {
  Eigen::Isometry3d m = Eigen::Isometry3d::Identity();
  if (joint.type == JointType::kRevolute) {
    m.linear() = Eigen::AngleAxisd(value, joint.axis).toRotationMatrix();
  } else {
    m.translation() = value * joint.axis;
  }
  return m;
}

}  // namespace detail

/// World frames of every link and, for each joint, its world axis and origin.
struct ChainState {
  std::vector<Eigen::Isometry3d> link_frames;
  std::vector<Vec3> joint_axes;
  std::vector<Vec3> joint_origins;
};

inline ChainState chain_state(const RobotModel& model, const Configuration& q) {
  detail::check_dimension(model, q);
  ChainState s;
  s.link_frames.reserve(model.dof());
  s.joint_axes.reserve(model.dof());
  s.joint_origins.reserve(model.dof());
  Eigen::Isometry3d frame = model.base;
  for (int i = 0; i < model.dof(); ++i) {
    const Joint& joint = model.joints[i];
    frame = frame * joint.origin;
    s.joint_axes.push_back(frame.linear() * joint.axis);
    s.joint_origins.push_back(frame.translation());
    frame = frame * detail::joint_motion(joint, q[i]);
    s.link_frames.push_back(frame);
  }
  return s;
}

/// World positions of all body points at q.
inline std::vector<Vec3> fk_points(const RobotModel& model, const Configuration& q) {
  const ChainState s = chain_state(model, q);
  std::vector<Vec3> out;
  out.reserve(model.body_points.size());
  for (const auto& p : model.body_points) out.push_back(s.link_frames[p.link] * p.offset);
  return out;
}

using PointJacobian = Eigen::Matrix<double, 3, Eigen::Dynamic>;

namespace detail {

inline PointJacobian point_jacobian(const RobotModel& model, const ChainState& s, int link,
                                    const Vec3& point) {
  PointJacobian jac = PointJacobian::Zero(3, model.dof());
  for (int i = 0; i <= link; ++i) {
    if (model.joints[i].type == JointType::kRevolute) {
      jac.col(i) = s.joint_axes[i].cross(point - s.joint_origins[i]);
    } else {
      jac.col(i) = s.joint_axes[i];
    }
  }
  return jac;
}

}  // namespace detail

/// Translational Jacobian d FK_j / d q of body point j.
inline PointJacobian jacobian_point(const RobotModel& model, const Configuration& q, int j) {
  if (j < 0 || j >= static_cast<int>(model.body_points.size())) {
    throw InvalidInput("body point index out of range");
  }
  const ChainState s = chain_state(model, q);
  const auto& bp = model.body_points[j];
  return detail::point_jacobian(model, s, bp.link, s.link_frames[bp.link] * bp.offset);
}

/// Body point positions together with their velocities for joint velocity qdot.
struct PointKinematics {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
};

inline PointKinematics point_kinematics(const RobotModel& model, const Configuration& q,
                                        const Eigen::VectorXd& qdot) {
  const ChainState s = chain_state(model, q);
  PointKinematics out;
  out.positions.reserve(model.body_points.size());
  out.velocities.reserve(model.body_points.size());
  for (const auto& bp : model.body_points) {
    const Vec3 p = s.link_frames[bp.link] * bp.offset;
    out.positions.push_back(p);
    out.velocities.push_back(detail::point_jacobian(model, s, bp.link, p) * qdot);
  }
  return out;
}

/// Inclusive linear interpolation from q_p to q_c with per-joint step <= max_step.
inline std::vector<Configuration> discretize_edge(const Configuration& q_p, const Configuration& q_c,
                                                  double max_step) {
  if (q_p.size() != q_c.size()) throw InvalidInput("edge endpoints differ in dimension");
  if (!(max_step > 0.0)) throw InvalidInput("edge discretization step must be positive");
  const Configuration delta = q_c - q_p;
  const double span = delta.size() == 0 ? 0.0 : delta.cwiseAbs().maxCoeff();
  if (span == 0.0) return {q_p};
  const auto segments = static_cast<int>(std::ceil(span / max_step - 1e-12));
  std::vector<Configuration> out;
  out.reserve(segments + 1);
  for (int k = 0; k < segments; ++k) {
    out.push_back(q_p + (static_cast<double>(k) / segments) * delta);
  }
  out.push_back(q_c);
  return out;
}

/// Voxels covered by a body-point sphere: the cell containing the point plus
/// every cell whose center is within the radius.
inline void add_sphere_voxels(const VoxelGrid& grid, const Vec3& p, double radius, VoxelSet& out) {
  if (const auto idx = grid.index_of(p)) out.push_back(*idx);
  if (radius <= 0.0) return;
  const double r2 = radius * radius;
  grid.for_each_cell_in_box(p - Vec3::Constant(radius), p + Vec3::Constant(radius),
                            [&](int i, int j, int k) {
                              if ((grid.center(i, j, k) - p).squaredNorm() <= r2) {
                                out.push_back(grid.linear(i, j, k));
                              }
                            });
}

/// Voxels touched by the robot's body-point spheres along the edge, sampled
/// at joint spacing max_step.
inline VoxelSet swept_voxels(const RobotModel& model, const Configuration& q_p, const Configuration& q_c,
                             const VoxelGrid& grid, double max_step) {
  VoxelSet out;
  for (const auto& q : discretize_edge(q_p, q_c, max_step)) {
    const auto points = fk_points(model, q);
    for (std::size_t j = 0; j < points.size(); ++j) {
      add_sphere_voxels(grid, points[j], model.body_points[j].radius, out);
    }
  }
  sort_unique(out);
  return out;
}

}  // namespace stap

#endif  // STAP_ROBOT_HPP
