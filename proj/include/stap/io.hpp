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

// JSON readers and writers for the file formats documented in docs/formats.md.

#ifndef STAP_IO_HPP
#define STAP_IO_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "stap/human.hpp"
#include "stap/planner.hpp"
#include "stap/robot.hpp"
#include "stap/timing.hpp"

namespace stap::io {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidInput("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

inline void check_header(const Json& j, const std::string& format) {
  if (!j.is_object() || j.value("format", "") != format) {
    throw InvalidInput("expected a document with format \"" + format + "\"");
  }
  if (j.value("version", 0) != kFormatVersion) {
    throw InvalidInput("unsupported " + format + " version");
  }
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInput(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("bad field \"") + key + "\": " + e.what());
  }
}

inline Vec3 vec3(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw InvalidInput("expected a 3-vector");
  return {v[0], v[1], v[2]};
}

inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Eigen::VectorXd vector(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// ---------------------------------------------------------------------------
// Human motion

inline HumanMotionSequence human_motion_from_json(const Json& j) {
  check_header(j, "stap.human_motion");
  HumanMotionSequence seq;
  const Json& sk = j.at("skeleton");
  seq.skeleton.parents = field<std::vector<int>>(sk, "parents");
  seq.skeleton.names = sk.value("names", std::vector<std::string>{});
  seq.dt = field<double>(j, "dt");
  for (const Json& js : j.at("samples")) {
    HumanMotionSample s;
    s.t = field<double>(js, "t");
    s.pelvis = vec3(js.at("pelvis"));
    for (const Json& q : js.at("quats")) {
      const auto w = q.get<std::vector<double>>();
      if (w.size() != 4) throw InvalidInput("quaternions are [w, x, y, z]");
      s.link_quats.emplace_back(w[0], w[1], w[2], w[3]);
    }
    s.link_lengths = field<std::vector<double>>(js, "lengths");
    s.link_radii = field<std::vector<double>>(js, "radii");
    seq.samples.push_back(std::move(s));
  }
  validate_sequence(seq);
  return seq;
}

inline Json to_json(const HumanMotionSequence& seq) {
  Json j;
  j["format"] = "stap.human_motion";
  j["version"] = kFormatVersion;
  j["skeleton"] = {{"parents", seq.skeleton.parents}, {"names", seq.skeleton.names}};
  j["dt"] = seq.dt;
  Json samples = Json::array();
  for (const auto& s : seq.samples) {
    Json quats = Json::array();
    for (const auto& q : s.link_quats) quats.push_back({q.w(), q.x(), q.y(), q.z()});
    samples.push_back({{"t", s.t},
                       {"pelvis", to_json(s.pelvis)},
                       {"quats", quats},
                       {"lengths", s.link_lengths},
                       {"radii", s.link_radii}});
  }
  j["samples"] = std::move(samples);
  return j;
}

inline HumanMotionSequence load_human_motion(const std::filesystem::path& path) {
  return human_motion_from_json(read_json(path));
}

inline void save_human_motion(const std::filesystem::path& path, const HumanMotionSequence& seq) {
  write_json(path, to_json(seq));
}

// ---------------------------------------------------------------------------
// Robot model

inline Eigen::Isometry3d pose_from_json(const Json& j) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  if (j.is_null()) return t;
  if (j.contains("xyz")) t.translation() = vec3(j.at("xyz"));
  if (j.contains("rpy")) {
    const Vec3 rpy = vec3(j.at("rpy"));
    t.linear() = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                  Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                     .toRotationMatrix();
  }
  return t;
}

inline RobotModel robot_model_from_json(const Json& j) {
  check_header(j, "stap.robot_model");
  RobotModel m;
  m.name = j.value("name", "");
  m.base = pose_from_json(j.value("base", Json()));
  for (const Json& jj : j.at("joints")) {
    Joint joint;
    joint.name = jj.value("name", "");
    const std::string type = jj.value("type", "revolute");
    if (type == "revolute") {
      joint.type = JointType::kRevolute;
    } else if (type == "prismatic") {
      joint.type = JointType::kPrismatic;
    } else {
      throw InvalidInput("unknown joint type: " + type);
    }
    joint.origin = pose_from_json(jj.value("origin", Json()));
    joint.axis = vec3(jj.at("axis")).normalized();
    const auto limits = field<std::vector<double>>(jj, "limits");
    if (limits.size() != 2) throw InvalidInput("joint limits are [min, max]");
    joint.lower = limits[0];
    joint.upper = limits[1];
    joint.max_vel = field<double>(jj, "max_vel");
    m.joints.push_back(std::move(joint));
  }
  for (const Json& jp : j.at("body_points")) {
    m.body_points.push_back({field<int>(jp, "link"), vec3(jp.at("offset")), field<double>(jp, "radius")});
  }
  if (j.contains("velocity_presets")) {
    m.velocity_presets = j.at("velocity_presets").get<std::map<std::string, std::vector<double>>>();
  }
  m.validate();
  return m;
}

inline RobotModel load_robot_model(const std::filesystem::path& path) {
  return robot_model_from_json(read_json(path));
}

// ---------------------------------------------------------------------------
// Timed trajectory

inline Json to_json(const TimedTrajectory& traj) {
  Json j;
  j["format"] = "stap.trajectory";
  j["version"] = kFormatVersion;
  j["mode"] = to_string(traj.mode);
  j["initial_wait"] = traj.initial_wait;
  Json wps = Json::array();
  for (const auto& q : traj.waypoints) wps.push_back(to_json(q));
  j["waypoints"] = std::move(wps);
  j["arrival_times"] = traj.arrival_times;
  Json lims = Json::array();
  for (const auto& v : traj.velocity_limits) lims.push_back(to_json(v));
  j["velocity_limits"] = std::move(lims);
  return j;
}

inline TimedTrajectory trajectory_from_json(const Json& j) {
  check_header(j, "stap.trajectory");
  TimedTrajectory traj;
  traj.mode = timing_mode_from_string(field<std::string>(j, "mode"));
  traj.initial_wait = field<double>(j, "initial_wait");
  for (const Json& q : j.at("waypoints")) traj.waypoints.push_back(vector(q));
  traj.arrival_times = field<std::vector<double>>(j, "arrival_times");
  for (const Json& v : j.at("velocity_limits")) traj.velocity_limits.push_back(vector(v));
  if (traj.waypoints.empty() || traj.arrival_times.size() != traj.waypoints.size() ||
      traj.velocity_limits.size() + 1 != traj.waypoints.size()) {
    throw InvalidInput("trajectory arrays have inconsistent lengths");
  }
  for (std::size_t k = 1; k < traj.arrival_times.size(); ++k) {
    if (!(traj.arrival_times[k] > traj.arrival_times[k - 1])) {
      throw InvalidInput("trajectory arrival times must be strictly increasing");
    }
  }
  return traj;
}

inline void save_trajectory(const std::filesystem::path& path, const TimedTrajectory& traj) {
  write_json(path, to_json(traj));
}

inline TimedTrajectory load_trajectory(const std::filesystem::path& path) {
  return trajectory_from_json(read_json(path));
}

// ---------------------------------------------------------------------------
// Planner and SSM parameters. Missing keys keep their defaults.

inline void update_from_json(PlannerConfig& c, const Json& j) {
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.n_c = j.value("n_c", c.n_c);
  c.steer_step = j.value("steer_step", c.steer_step);
  c.neighbor_factor = j.value("neighbor_factor", c.neighbor_factor);
  c.goal_tolerance = j.value("goal_tolerance", c.goal_tolerance);
  c.goal_bias = j.value("goal_bias", c.goal_bias);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
}

inline Json to_json(const PlannerConfig& c) {
  return {{"max_iterations", c.max_iterations}, {"n_c", c.n_c},
          {"steer_step", c.steer_step},         {"neighbor_factor", c.neighbor_factor},
          {"goal_tolerance", c.goal_tolerance}, {"goal_bias", c.goal_bias},
          {"rng_seed", c.rng_seed}};
}

inline void update_from_json(SsmParams& p, const Json& j) {
  p.reaction_time = j.value("reaction_time", p.reaction_time);
  p.max_decel = j.value("max_decel", p.max_decel);
  p.min_distance = j.value("min_distance", p.min_distance);
  if (j.contains("ratio_threshold") && j.at("ratio_threshold").is_string()) {
    if (j.at("ratio_threshold").get<std::string>() != "inf") throw InvalidInput("ratio_threshold must be a number or \"inf\"");
    p.ratio_threshold = kInfinity;
  } else {
    p.ratio_threshold = j.value("ratio_threshold", p.ratio_threshold);
  }
  p.lookahead = j.value("lookahead", p.lookahead);
  p.dq_step = j.value("dq_step", p.dq_step);
  p.t_pad = j.value("t_pad", p.t_pad);
}

inline Json to_json(const SsmParams& p) {
  Json j = {{"reaction_time", p.reaction_time}, {"max_decel", p.max_decel}, {"min_distance", p.min_distance},
            {"lookahead", p.lookahead},         {"dq_step", p.dq_step},     {"t_pad", p.t_pad}};
  if (std::isinf(p.ratio_threshold)) {
    j["ratio_threshold"] = "inf";
  } else {
    j["ratio_threshold"] = p.ratio_threshold;
  }
  return j;
}

}  // namespace stap::io

#endif  // STAP_IO_HPP
