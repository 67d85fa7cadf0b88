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

// stap: plan, execute and benchmark human-aware trajectories.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stap/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitDeadlock = 3;

// Command-line overrides of scenario parameters. Unset fields leave the
// scenario value alone.
struct Overrides {
  std::optional<int> max_iterations, n_c;
  std::optional<double> steer_step, neighbor_factor, goal_tolerance, goal_bias;
  std::optional<std::uint64_t> seed;
  std::optional<double> reaction_time, max_decel, min_distance, ratio_threshold, lookahead, dq_step, t_pad;
  std::optional<double> tick, timeout_factor;
  std::optional<int> trials;
  std::optional<std::string> preset;
  std::vector<std::string> modes;

  void add_to(CLI::App* app) {
    app->add_option("--max-iterations", max_iterations, "planner iterations");
    app->add_option("--n-c", n_c, "descendant levels re-timed after a rewire");
    app->add_option("--steer-step", steer_step, "max joint-space extension [rad]");
    app->add_option("--neighbor-factor", neighbor_factor, "k = ceil(factor * log n)");
    app->add_option("--goal-tolerance", goal_tolerance, "[rad]");
    app->add_option("--goal-bias", goal_bias, "probability of sampling the goal");
    app->add_option("--seed", seed, "planner RNG seed (trial i uses seed + i)");
    app->add_option("--reaction-time", reaction_time, "SSM reaction time [s]");
    app->add_option("--max-decel", max_decel, "SSM robot deceleration [m/s^2]");
    app->add_option("--min-distance", min_distance, "SSM protective distance [m]");
    app->add_option("--ratio-threshold", ratio_threshold, "slowdown ratio that triggers the lookahead");
    app->add_option("--lookahead", lookahead, "SSM lookahead window [s]");
    app->add_option("--dq-step", dq_step, "edge integration spacing [rad]");
    app->add_option("--t-pad", t_pad, "slack after an avoidance interval [s]");
    app->add_option("--tick", tick, "execution tick [s]");
    app->add_option("--timeout-factor", timeout_factor, "deadlock after factor * planned duration");
    app->add_option("--trials", trials, "repeated trials");
    app->add_option("--preset", preset, "robot velocity preset");
    app->add_option("--mode", modes, "timing modes (stap-pt, fast-retiming)");
  }

  void apply(stap::Scenario& sc) const {
    auto set = [](auto& dst, const auto& src) {
      if (src) dst = *src;
    };
    set(sc.planner.max_iterations, max_iterations);
    set(sc.planner.n_c, n_c);
    set(sc.planner.steer_step, steer_step);
    set(sc.planner.neighbor_factor, neighbor_factor);
    set(sc.planner.goal_tolerance, goal_tolerance);
    set(sc.planner.goal_bias, goal_bias);
    set(sc.planner.rng_seed, seed);
    set(sc.ssm.reaction_time, reaction_time);
    set(sc.ssm.max_decel, max_decel);
    set(sc.ssm.min_distance, min_distance);
    set(sc.ssm.ratio_threshold, ratio_threshold);
    set(sc.ssm.lookahead, lookahead);
    set(sc.ssm.dq_step, dq_step);
    set(sc.ssm.t_pad, t_pad);
    set(sc.exec.tick, tick);
    set(sc.exec.timeout_factor, timeout_factor);
    set(sc.trials, trials);
    set(sc.velocity_preset, preset);
    if (!modes.empty()) {
      sc.modes.clear();
      for (const auto& m : modes) sc.modes.push_back(stap::timing_mode_from_string(m));
    }
    sc.validate();
  }
};

void print_metrics(const stap::ModeReport& mr) {
  const auto& e = mr.exec;
  std::printf("%-14s planned %.3f s  actual %.3f s  est_error %.4f  avg_sep %.3f m  min_sep %.3f m  stop %.2f s%s\n",
              stap::to_string(mr.mode).c_str(), e.planned_duration, e.actual_duration, e.estimation_error,
              e.avg_separation, e.min_separation, e.stop_time, e.deadlocked ? "  DEADLOCK" : "");
}

int cmd_plan(const std::string& scenario_path, const Overrides& ov, const std::string& out_dir) {
  auto sc = stap::io::load_scenario(scenario_path);
  ov.apply(sc);
  const stap::PreparedScenario ps(sc);
  for (const auto& w : ps.map.warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());
  stap::PlannerConfig cfg = sc.planner;
  const auto outcome = stap::plan(ps.map, ps.robot, sc.start, sc.goal, cfg, sc.ssm);
  const std::filesystem::path dir = out_dir.empty() ? sc.output_dir : std::filesystem::path(out_dir);
  if (!dir.empty()) stap::io::write_text(dir / "cost_history.csv", stap::cost_history_csv(outcome.cost_history));
  const auto& d = outcome.diagnostics;
  std::printf("nodes %d  goal nodes %d  edge evaluations %zu\n", d.nodes, d.goal_nodes, d.edge_evaluations);
  if (!outcome.feasible()) {
    std::printf("infeasible: %s\n", d.reason.c_str());
    return kExitInfeasible;
  }
  std::printf("waypoints %zu  estimated duration %.4f s\n", outcome.solution->waypoints.size(),
              outcome.solution->estimated_duration);
  for (auto mode : sc.modes) {
    const auto traj = stap::parameterize(mode, *outcome.solution, ps.robot);
    std::printf("%-14s duration %.4f s  initial wait %.3f s\n", stap::to_string(mode).c_str(), traj.duration(),
                traj.initial_wait);
    if (!dir.empty()) stap::io::save_trajectory(dir / ("trajectory_" + stap::to_string(mode) + ".json"), traj);
  }
  return kExitOk;
}

int cmd_execute(const std::string& scenario_path, const std::string& traj_path, const Overrides& ov,
                const std::string& log_path, int trial) {
  auto sc = stap::io::load_scenario(scenario_path);
  ov.apply(sc);
  const stap::PreparedScenario ps(sc);
  const auto traj = stap::io::load_trajectory(traj_path);
  if (traj.waypoints.front().size() != ps.robot.dof()) throw stap::InvalidInput("trajectory dof does not match robot");
  auto opts = sc.exec;
  opts.record_log = !log_path.empty();
  stap::ModeReport mr;
  mr.mode = traj.mode;
  mr.planned = true;
  mr.exec = stap::execute(traj, ps.robot, ps.actual_for_trial(trial), sc.ssm, opts);
  print_metrics(mr);
  if (!log_path.empty()) stap::io::write_text(log_path, stap::tick_log_csv(mr.exec));
  return mr.exec.deadlocked ? kExitDeadlock : kExitOk;
}

int cmd_bench(const std::string& scenario_path, const Overrides& ov, const std::string& out_dir, int jobs) {
  auto sc = stap::io::load_scenario(scenario_path);
  ov.apply(sc);
  const std::filesystem::path dir = out_dir.empty() ? sc.output_dir : std::filesystem::path(out_dir);
  sc.exec.record_log = !dir.empty();
  const stap::PreparedScenario ps(sc);
  for (const auto& w : ps.map.warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const auto rep = stap::run_scenario(ps, jobs);
  std::fputs(stap::summary_table(rep).c_str(), stdout);
  if (!dir.empty()) stap::write_report(rep, dir);
  return stap::exit_code(rep);
}

int cmd_synth(const std::string& kind, const stap::SyntheticHumanParams& p, const std::string& out) {
  const auto seq = stap::generate_synthetic_human(stap::motion_kind_from_string(kind), p);
  stap::io::save_human_motion(out, seq);
  std::printf("%zu samples, t_end %.2f s -> %s\n", seq.samples.size(), seq.t_end(), out.c_str());
  return kExitOk;
}

// Minimal CSV line chart: one polyline per y column.
int cmd_plot(const std::string& csv, const std::string& x_col, const std::vector<std::string>& y_cols,
             const std::string& out, const std::string& title) {
  std::ifstream in(csv);
  if (!in) throw stap::InvalidInput("cannot open " + csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw stap::InvalidInput("no column named " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xi = column(x_col);
  std::vector<std::size_t> yi;
  for (const auto& y : y_cols) yi.push_back(column(y));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() == header.size()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw stap::InvalidInput("no data rows in " + csv);
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& r : rows) {
    x0 = std::min(x0, r[xi]);
    x1 = std::max(x1, r[xi]);
    for (auto c : yi) {
      if (!std::isfinite(r[c])) continue;
      y0 = std::min(y0, r[c]);
      y1 = std::max(y1, r[c]);
    }
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double w = 640, h = 400, m = 50;
  auto px = [&](double x) { return m + (x - x0) / (x1 - x0) * (w - 2 * m); };
  auto py = [&](double y) { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  svg << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x0);
  svg << "<text x=\"" << m << "\" y=\"" << h - m + 15 << "\" font-size=\"11\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.3g", x1);
  svg << "<text x=\"" << w - m << "\" y=\"" << h - m + 15 << "\" font-size=\"11\" text-anchor=\"end\">" << buf
      << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.3g", y0);
  svg << "<text x=\"" << m - 4 << "\" y=\"" << h - m << "\" font-size=\"11\" text-anchor=\"end\">" << buf
      << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.3g", y1);
  svg << "<text x=\"" << m - 4 << "\" y=\"" << m + 10 << "\" font-size=\"11\" text-anchor=\"end\">" << buf
      << "</text>\n";
  svg << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-size=\"12\">" << x_col
      << "</text>\n";
  for (std::size_t k = 0; k < yi.size(); ++k) {
    svg << "<polyline fill=\"none\" stroke=\"" << colors[k % 5] << "\" points=\"";
    for (const auto& r : rows) {
      if (std::isfinite(r[yi[k]])) svg << px(r[xi]) << "," << py(r[yi[k]]) << " ";
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << w - m - 4 << "\" y=\"" << m + 14 + 14 * k << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
        << colors[k % 5] << "\">" << y_cols[k] << "</text>\n";
  }
  svg << "</svg>\n";
  stap::io::write_text(out, svg.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal human-aware motion planning"};
  app.require_subcommand(1);

  std::string scenario, out_dir, traj_path, log_path;
  int jobs = 0;
  int trial = 0;
  Overrides ov;

  auto* plan = app.add_subcommand("plan", "plan once and write trajectory files");
  plan->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  plan->add_option("-o,--out", out_dir, "output directory (default: scenario output_dir)");
  ov.add_to(plan);

  auto* exec = app.add_subcommand("execute", "run a trajectory against the scenario's actual human");
  exec->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  exec->add_option("trajectory", traj_path, "trajectory file")->required()->check(CLI::ExistingFile);
  exec->add_option("--log", log_path, "per-tick CSV log");
  exec->add_option("--trial", trial, "trial index used for the human perturbation seed");
  ov.add_to(exec);

  auto* bench = app.add_subcommand("bench", "repeated plan/parameterize/execute trials with a summary table");
  bench->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  bench->add_option("-o,--out", out_dir, "output directory (default: scenario output_dir)");
  bench->add_option("-j,--jobs", jobs, "parallel trials (default: hardware threads)");
  ov.add_to(bench);

  std::string kind = "arm-sweep";
  std::string synth_out;
  stap::SyntheticHumanParams sp;
  double yaw_deg = 180.0;
  std::vector<double> pelvis;
  auto* synth = app.add_subcommand("synth-human", "write a synthetic human motion file");
  synth->add_option("--kind", kind, "reach-shelf, reach-table or arm-sweep");
  synth->add_option("--period", sp.period, "cycle period [s]");
  synth->add_option("--cycles", sp.cycles, "number of cycles");
  synth->add_option("--amplitude", sp.amplitude_deg, "excursion [deg]");
  synth->add_option("--dwell", sp.dwell, "fraction of the period held at the extreme");
  synth->add_option("--dt", sp.dt, "sample spacing [s]");
  synth->add_option("--start-delay", sp.start_delay, "rest before the first cycle [s]");
  synth->add_option("--tail", sp.tail, "rest after the last cycle [s]");
  synth->add_option("--pelvis", pelvis, "pelvis position x y z [m]")->expected(3);
  synth->add_option("--yaw", yaw_deg, "facing direction [deg]");
  synth->add_option("--arm-reach", sp.arm_reach, "arm-sweep hand distance from the neck [m]");
  synth->add_option("--arm-drop", sp.arm_drop, "arm-sweep hand height offset [m]");
  synth->add_option("-o,--out", synth_out, "output file")->required();

  std::string csv, x_col = "t", plot_out, title;
  std::vector<std::string> y_cols;
  auto* plot = app.add_subcommand("plot", "render columns of a CSV series as an SVG line chart");
  plot->add_option("csv", csv, "input CSV (tick log or cost history)")->required()->check(CLI::ExistingFile);
  plot->add_option("-x", x_col, "x column");
  plot->add_option("-y", y_cols, "y column(s)")->required();
  plot->add_option("-o,--out", plot_out, "output SVG")->required();
  plot->add_option("--title", title, "chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; usage errors map to the error code.
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    if (*plan) return cmd_plan(scenario, ov, out_dir);
    if (*exec) return cmd_execute(scenario, traj_path, ov, log_path, trial);
    if (*bench) return cmd_bench(scenario, ov, out_dir, jobs);
    if (*synth) {
      if (!pelvis.empty()) sp.pelvis = stap::Vec3(pelvis[0], pelvis[1], pelvis[2]);
      sp.yaw = yaw_deg * M_PI / 180.0;
      return cmd_synth(kind, sp, synth_out);
    }
    if (*plot) return cmd_plot(csv, x_col, y_cols, plot_out, title);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
