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

// Scenario files and the plan -> parameterize -> execute pipeline.

#ifndef STAP_SCENARIO_HPP
#define STAP_SCENARIO_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "stap/execution.hpp"
#include "stap/io.hpp"
#include "stap/synthetic.hpp"

namespace stap {

/// Where a human motion sequence comes from: a motion file, or a synthetic
/// generator configuration.
struct HumanSource {
  std::filesystem::path file;
  std::optional<std::pair<MotionKind, SyntheticHumanParams>> synthetic;

  HumanMotionSequence load() const {
    if (synthetic) return generate_synthetic_human(synthetic->first, synthetic->second);
    return io::load_human_motion(file);
  }
};

struct Perturbation {
  double time_shift = 0.0;  // [s]
  double jitter = 0.0;      // [m], std dev of a per-trial horizontal offset
};

struct Scenario {
  std::string name;
  std::filesystem::path robot_path;
  std::string velocity_preset;  // empty keeps the model's max_vel
  std::vector<HumanSource> predicted;
  std::vector<HumanSource> actual;  // empty means the prediction is exact
  Perturbation perturbation;
  VoxelGrid grid;
  Configuration start;
  Configuration goal;
  PlannerConfig planner;
  SsmParams ssm;
  ExecutionOptions exec;
  std::vector<TimingMode> modes{TimingMode::kStapPt, TimingMode::kFastRetiming};
  int trials = 1;
  std::filesystem::path output_dir;

  void validate() const {
    if (predicted.empty() && !actual.empty()) throw InvalidInput("actual humans given without a prediction");
    if (start.size() == 0 || start.size() != goal.size()) throw InvalidInput("start and goal must have equal size");
    if (start.isApprox(goal, 0.0)) throw InvalidInput("start equals goal");
    if (trials < 1) throw InvalidInput("trials must be at least 1");
    if (modes.empty()) throw InvalidInput("no timing modes selected");
    planner.validate();
    ssm.validate();
  }
};

namespace io {

inline HumanSource human_source_from_json(const Json& j, const std::filesystem::path& base) {
  HumanSource src;
  if (j.is_string()) {
    src.file = base / j.get<std::string>();
    if (!std::filesystem::exists(src.file)) throw InvalidInput("human motion file not found: " + src.file.string());
    return src;
  }
  if (!j.contains("synthetic")) throw InvalidInput("human source needs a file path or a \"synthetic\" block");
  const Json& s = j.at("synthetic");
  SyntheticHumanParams p;
  p.period = s.value("period", p.period);
  p.cycles = s.value("cycles", p.cycles);
  p.amplitude_deg = s.value("amplitude_deg", p.amplitude_deg);
  p.dwell = s.value("dwell", p.dwell);
  p.dt = s.value("dt", p.dt);
  p.start_delay = s.value("start_delay", p.start_delay);
  p.tail = s.value("tail", p.tail);
  if (s.contains("pelvis")) p.pelvis = vec3(s.at("pelvis"));
  p.yaw = s.value("yaw_deg", p.yaw * 180.0 / M_PI) * M_PI / 180.0;
  p.arm_reach = s.value("arm_reach", p.arm_reach);
  p.arm_drop = s.value("arm_drop", p.arm_drop);
  src.synthetic.emplace(motion_kind_from_string(field<std::string>(s, "kind")), p);
  return src;
}

inline VoxelGrid grid_from_json(const Json& j) {
  const double res = field<double>(j, "resolution");
  if (j.contains("dims")) {
    const auto d = field<std::vector<int>>(j, "dims");
    if (d.size() != 3) throw InvalidInput("grid dims must have three entries");
    return VoxelGrid(vec3(j.at("origin")), res, {d[0], d[1], d[2]});
  }
  return VoxelGrid::covering(vec3(j.at("lower")), vec3(j.at("upper")), res);
}

inline Scenario scenario_from_json(const Json& j, const std::filesystem::path& base) {
  check_header(j, "stap.scenario");
  Scenario sc;
  sc.name = j.value("name", "scenario");
  sc.robot_path = base / field<std::string>(j, "robot");
  sc.velocity_preset = j.value("velocity_preset", "");
  if (j.contains("predicted_humans")) {
    for (const Json& h : j.at("predicted_humans")) sc.predicted.push_back(human_source_from_json(h, base));
  }
  if (j.contains("actual_humans")) {
    for (const Json& h : j.at("actual_humans")) sc.actual.push_back(human_source_from_json(h, base));
  }
  if (j.contains("perturbation")) {
    sc.perturbation.time_shift = j.at("perturbation").value("time_shift", 0.0);
    sc.perturbation.jitter = j.at("perturbation").value("jitter", 0.0);
  }
  sc.grid = grid_from_json(j.at("grid"));
  sc.start = vector(j.at("start"));
  sc.goal = vector(j.at("goal"));
  if (j.contains("planner")) update_from_json(sc.planner, j.at("planner"));
  if (j.contains("ssm")) update_from_json(sc.ssm, j.at("ssm"));
  if (j.contains("execution")) {
    const Json& e = j.at("execution");
    sc.exec.tick = e.value("tick", sc.exec.tick);
    sc.exec.timeout_factor = e.value("timeout_factor", sc.exec.timeout_factor);
    sc.exec.min_timeout = e.value("min_timeout", sc.exec.min_timeout);
  }
  if (j.contains("modes")) {
    sc.modes.clear();
    for (const Json& m : j.at("modes")) sc.modes.push_back(timing_mode_from_string(m.get<std::string>()));
  }
  sc.trials = j.value("trials", sc.trials);
  if (j.contains("output_dir")) sc.output_dir = base / j.at("output_dir").get<std::string>();
  if (!std::filesystem::exists(sc.robot_path)) throw InvalidInput("robot model not found: " + sc.robot_path.string());
  sc.validate();
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_json(path), path.parent_path());
}

}  // namespace io

/// Everything a trial needs that does not depend on the trial index.
struct PreparedScenario {
  Scenario scenario;
  RobotModel robot;
  std::vector<HumanMotionSequence> predicted;
  std::vector<HumanMotionSequence> actual;  // before per-trial perturbation
  OccupancyMap map;

  explicit PreparedScenario(Scenario sc) : scenario(std::move(sc)), map(scenario.grid) {
    robot = io::load_robot_model(scenario.robot_path);
    if (!scenario.velocity_preset.empty()) robot.apply_velocity_preset(scenario.velocity_preset);
    if (scenario.start.size() != robot.dof()) throw InvalidInput("start/goal size does not match the robot dof");
    if (!robot.within_limits(scenario.start) || !robot.within_limits(scenario.goal)) {
      throw InvalidInput("start or goal outside joint limits");
    }
    for (const auto& src : scenario.predicted) predicted.push_back(src.load());
    for (const auto& src : scenario.actual) actual.push_back(src.load());
    if (actual.empty()) actual = predicted;
    map = build_occupancy_map(predicted, scenario.grid);
  }

  std::uint64_t trial_seed(int trial) const { return scenario.planner.rng_seed + static_cast<std::uint64_t>(trial); }

  std::vector<HumanMotionSequence> actual_for_trial(int trial) const {
    const auto& pert = scenario.perturbation;
    if (pert.time_shift == 0.0 && pert.jitter == 0.0) return actual;
    std::vector<HumanMotionSequence> out;
    for (std::size_t h = 0; h < actual.size(); ++h) {
      out.push_back(perturb_sequence(actual[h], pert.time_shift, pert.jitter, trial_seed(trial) * 7919 + h));
    }
    return out;
  }
};

struct ModeReport {
  TimingMode mode = TimingMode::kStapPt;
  bool planned = false;
  TimedTrajectory trajectory;
  ExecutionResult exec;
  std::size_t replay_violations = 0;
};

struct TrialReport {
  int trial = 0;
  std::uint64_t seed = 0;
  PlanOutcome plan;
  std::vector<ModeReport> modes;
};

struct ScenarioReport {
  std::string name;
  std::vector<TrialReport> trials;
};

inline TrialReport run_trial(const PreparedScenario& ps, int trial) {
  const Scenario& sc = ps.scenario;
  TrialReport tr;
  tr.trial = trial;
  tr.seed = ps.trial_seed(trial);
  PlannerConfig cfg = sc.planner;
  cfg.rng_seed = tr.seed;
  tr.plan = plan(ps.map, ps.robot, sc.start, sc.goal, cfg, sc.ssm);
  const auto humans = ps.actual_for_trial(trial);
  for (TimingMode mode : sc.modes) {
    ModeReport mr;
    mr.mode = mode;
    if (tr.plan.feasible()) {
      mr.planned = true;
      mr.trajectory = parameterize(mode, *tr.plan.solution, ps.robot);
      mr.replay_violations = replay_violations(mr.trajectory, ps.robot, ps.map).size();
      mr.exec = execute(mr.trajectory, ps.robot, humans, sc.ssm, sc.exec);
    }
    tr.modes.push_back(std::move(mr));
  }
  return tr;
}

/// Runs every trial, `jobs` at a time. Reports are ordered by trial index.
inline ScenarioReport run_scenario(const PreparedScenario& ps, int jobs = 0) {
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  ScenarioReport rep;
  rep.name = ps.scenario.name;
  rep.trials.resize(ps.scenario.trials);
  for (int first = 0; first < ps.scenario.trials; first += jobs) {
    std::vector<std::future<TrialReport>> batch;
    const int last = std::min(ps.scenario.trials, first + jobs);
    for (int t = first; t < last; ++t) batch.push_back(std::async(std::launch::async, run_trial, std::cref(ps), t));
    for (int t = first; t < last; ++t) rep.trials[t] = batch[t - first].get();
  }
  return rep;
}

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
  int n = 0;
};

inline Stat summarize(const std::vector<double>& xs) {
  Stat s;
  s.n = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

/// Per-mode statistics over trials that produced a plan and finished.
struct ModeSummary {
  TimingMode mode = TimingMode::kStapPt;
  int trials = 0;
  int planned = 0;
  int deadlocked = 0;
  std::size_t replay_violations = 0;
  Stat planned_duration;
  Stat actual_duration;
  Stat estimation_error;
  Stat avg_separation;
  Stat min_separation;
  Stat stop_time;
};

inline std::vector<ModeSummary> summarize(const ScenarioReport& rep) {
  std::vector<ModeSummary> out;
  if (rep.trials.empty()) return out;
  for (std::size_t m = 0; m < rep.trials.front().modes.size(); ++m) {
    ModeSummary s;
    s.mode = rep.trials.front().modes[m].mode;
    std::vector<double> pd, ad, ee, as, ms, st;
    for (const auto& tr : rep.trials) {
      const auto& mr = tr.modes[m];
      ++s.trials;
      if (!mr.planned) continue;
      ++s.planned;
      s.replay_violations += mr.replay_violations;
      if (mr.exec.deadlocked) {
        ++s.deadlocked;
        continue;
      }
      pd.push_back(mr.exec.planned_duration);
      ad.push_back(mr.exec.actual_duration);
      ee.push_back(mr.exec.estimation_error);
      as.push_back(mr.exec.avg_separation);
      ms.push_back(mr.exec.min_separation);
      st.push_back(mr.exec.stop_time);
    }
    s.planned_duration = summarize(pd);
    s.actual_duration = summarize(ad);
    s.estimation_error = summarize(ee);
    s.avg_separation = summarize(as);
    s.min_separation = summarize(ms);
    s.stop_time = summarize(st);
    out.push_back(s);
  }
  return out;
}

inline std::string format_stat(const Stat& s, int precision = 3) {
  if (s.n == 0) return "-";
  if (!std::isfinite(s.mean)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f +- %.*f", precision, s.mean, precision, s.stddev);
  return buf;
}

/// Fixed-format summary table; contains no wall-clock data so identical
/// seeds give identical bytes.
inline std::string summary_table(const ScenarioReport& rep) {
  std::ostringstream os;
  os << "scenario: " << rep.name << "\n";
  os << "trials: " << rep.trials.size() << "\n";
  char line[512];
  std::snprintf(line, sizeof line, "%-14s %7s %6s %10s %18s %18s %18s %18s %18s %18s\n", "mode", "planned", "dead",
                "violations", "planned_dur[s]", "actual_dur[s]", "est_error", "avg_sep[m]", "min_sep[m]",
                "stop_time[s]");
  os << line;
  for (const auto& s : summarize(rep)) {
    std::snprintf(line, sizeof line, "%-14s %3d/%-3d %6d %10zu %18s %18s %18s %18s %18s %18s\n",
                  to_string(s.mode).c_str(), s.planned, s.trials, s.deadlocked, s.replay_violations,
                  format_stat(s.planned_duration).c_str(), format_stat(s.actual_duration).c_str(),
                  format_stat(s.estimation_error).c_str(), format_stat(s.avg_separation).c_str(),
                  format_stat(s.min_separation).c_str(), format_stat(s.stop_time).c_str());
    os << line;
  }
  return os.str();
}

/// 0 success, 2 some trial had no plan, 3 some execution deadlocked.
inline int exit_code(const ScenarioReport& rep) {
  bool infeasible = false;
  bool deadlock = false;
  for (const auto& tr : rep.trials) {
    if (!tr.plan.feasible()) infeasible = true;
    for (const auto& mr : tr.modes) deadlock = deadlock || (mr.planned && mr.exec.deadlocked);
  }
  if (infeasible) return 2;
  if (deadlock) return 3;
  return 0;
}

inline std::string tick_log_csv(const ExecutionResult& res) {
  std::ostringstream os;
  os.precision(10);
  os << "t";
  if (!res.log.empty()) {
    for (Eigen::Index i = 0; i < res.log.front().q.size(); ++i) os << ",q" << i;
  }
  os << ",min_separation,speed_scale\n";
  for (const auto& r : res.log) {
    os << r.t;
    for (Eigen::Index i = 0; i < r.q.size(); ++i) os << "," << r.q[i];
    os << "," << r.min_separation << "," << r.speed_scale << "\n";
  }
  return os.str();
}

inline std::string cost_history_csv(const std::vector<double>& history) {
  std::ostringstream os;
  os.precision(10);
  os << "iteration,best_cost\n";
  for (std::size_t i = 0; i < history.size(); ++i) os << i + 1 << "," << history[i] << "\n";
  return os.str();
}

/// Writes summary.txt and, per trial, the cost history, trajectory files and
/// tick logs under `dir`.
inline void write_report(const ScenarioReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_text(dir / "summary.txt", summary_table(rep));
  for (const auto& tr : rep.trials) {
    char name[32];
    std::snprintf(name, sizeof name, "trial_%03d", tr.trial);
    const auto tdir = dir / name;
    io::write_text(tdir / "cost_history.csv", cost_history_csv(tr.plan.cost_history));
    for (const auto& mr : tr.modes) {
      if (!mr.planned) continue;
      const std::string m = to_string(mr.mode);
      io::save_trajectory(tdir / ("trajectory_" + m + ".json"), mr.trajectory);
      io::write_text(tdir / ("ticks_" + m + ".csv"), tick_log_csv(mr.exec));
    }
  }
}

}  // namespace stap

#endif  // STAP_SCENARIO_HPP
