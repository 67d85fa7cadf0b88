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

#ifndef STAP_PLANNER_HPP
#define STAP_PLANNER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "stap/cost.hpp"

namespace stap {

struct PlannerConfig {
  int max_iterations = 500;
  int n_c = 3;                   // descendant levels re-timed after a rewire
  double steer_step = 0.5;       // max joint-space distance of a new node from its nearest [rad]
  double neighbor_factor = M_E;  // k = ceil(neighbor_factor * log(node count))
  double goal_tolerance = 1e-3;  // [rad]
  double goal_bias = 0.05;
  std::uint64_t rng_seed = 1;

  void validate() const {
    if (max_iterations < 1) throw InvalidInput("max_iterations must be >= 1");
    if (n_c < 0) throw InvalidInput("N_c must be >= 0");
    if (!(steer_step > 0.0)) throw InvalidInput("steer step must be positive");
    if (!(neighbor_factor > 0.0)) throw InvalidInput("neighbor factor must be positive");
    if (!(goal_tolerance >= 0.0)) throw InvalidInput("goal tolerance must be non-negative");
    if (!(goal_bias >= 0.0 && goal_bias <= 1.0)) throw InvalidInput("goal bias must be in [0, 1]");
  }
};

/// Edge costs of the time-aware planner: occupancy-map avoidance data and
/// SSM-adjusted timing.
class StapEdgeModel {
 public:
  StapEdgeModel(const OccupancyMap& map, const RobotModel& robot, SsmParams ssm)
      : map_(&map), robot_(&robot), ssm_(ssm) {}

  double nominal(const Configuration& a, const Configuration& b) const {
    return nominal_time(*robot_, a, b);
  }
  EdgeAvoidance avoidance(const Configuration& a, const Configuration& b) const {
    return edge_avoidance(*map_, *robot_, a, b, ssm_.dq_step);
  }
  EdgeAvoidance hold(const Configuration& q) const { return avoidance(q, q); }
  std::optional<EdgeTiming> timing(const Configuration& a, const Configuration& b,
                                   const EdgeAvoidance& avoid, double t_arr) const {
    return timed_passage(*map_, *robot_, avoid, a, b, t_arr, ssm_);
  }

  const OccupancyMap& map() const { return *map_; }
  const RobotModel& robot() const { return *robot_; }
  const SsmParams& ssm() const { return ssm_; }

 private:
  const OccupancyMap* map_;
  const RobotModel* robot_;
  SsmParams ssm_;
};

struct PlanNode {
  Configuration q;
  double t_arr = kInfinity;
  int parent = -1;
  EdgeTiming incoming;  // timing of the parent edge; for the root, the start hold
  std::vector<int> children;
};

/// Cached per-edge data, kept for suboptimal connections too.
struct EdgeRecord {
  EdgeAvoidance avoid;
  double nominal = 0.0;
  double memo_t_arr = std::numeric_limits<double>::quiet_NaN();
  std::optional<EdgeTiming> memo;
};

/// Search tree of the time-aware RRT*: nodes carry earliest arrival times,
/// edges are cached by directed node pair.
template <typename EdgeModel>
class PlanGraph {
 public:
  explicit PlanGraph(const EdgeModel& model) : model_(&model) {}

  const EdgeModel& model() const { return *model_; }
  const std::vector<PlanNode>& nodes() const { return nodes_; }
  const PlanNode& node(int i) const { return nodes_[i]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  std::size_t cached_edges() const { return cache_.size(); }
  std::size_t evaluations() const { return evaluations_; }

  int add_root(const Configuration& q) {
    nodes_.clear();
    cache_.clear();
    PlanNode root;
    root.q = q;
    root.t_arr = 0.0;
    nodes_.push_back(std::move(root));
    start_hold_ = model_->hold(q);
    return 0;
  }

  /// Appends a node with no parent and infinite arrival time.
  int add_detached(const Configuration& q) {
    recent_keys_.clear();
    PlanNode n;
    n.q = q;
    nodes_.push_back(std::move(n));
    return size() - 1;
  }

  /// Removes the most recently added node; it must still be detached.
  void pop_detached() {
    const int id = size() - 1;
    for (std::uint64_t k : recent_keys_) {
      const auto [a, b] = unkey(k);
      if (a == id || b == id) cache_.erase(k);
    }
    recent_keys_.clear();
    nodes_.pop_back();
  }

  EdgeRecord& edge(int from, int to) {
    auto [it, inserted] = cache_.try_emplace(key(from, to));
    if (inserted) {
      recent_keys_.push_back(it->first);
      it->second.avoid = model_->avoidance(nodes_[from].q, nodes_[to].q);
      it->second.nominal = model_->nominal(nodes_[from].q, nodes_[to].q);
    }
    return it->second;
  }

  double nominal(int from, int to) const {
    if (const auto it = cache_.find(key(from, to)); it != cache_.end()) return it->second.nominal;
    return model_->nominal(nodes_[from].q, nodes_[to].q);
  }

  /// Timing of edge from -> to departing no earlier than from's current
  /// arrival. Rejects departures that would stretch `from`'s own incoming
  /// edge (or the start hold) into one of its avoidance intervals.
  std::optional<EdgeTiming> evaluate(int from, int to) {
    const double t_arr = nodes_[from].t_arr;
    if (!std::isfinite(t_arr)) return std::nullopt;
    EdgeRecord& rec = edge(from, to);
    if (!(rec.memo_t_arr == t_arr)) {
      ++evaluations_;
      rec.memo = model_->timing(nodes_[from].q, nodes_[to].q, rec.avoid, t_arr);
      rec.memo_t_arr = t_arr;
    }
    if (!rec.memo) return std::nullopt;
    if (!hold_feasible(from, rec.memo->t_p)) return std::nullopt;
    return rec.memo;
  }

  /// Whether the robot can still be on (or parked at the end of) node's
  /// incoming edge until departure time t_depart.
  bool hold_feasible(int node, double t_depart) {
    const PlanNode& n = nodes_[node];
    if (n.parent < 0) return !any_overlap(start_hold_.intervals, 0.0, t_depart) &&
                             t_depart <= start_hold_.last_pass;
    if (t_depart <= n.t_arr) return true;
    const EdgeRecord& in = edge(n.parent, node);
    return !any_overlap(in.avoid.intervals, n.incoming.t_p, t_depart) && t_depart <= in.avoid.last_pass;
  }

  bool is_ancestor(int ancestor, int node) const {
    for (int cur = node; cur >= 0; cur = nodes_[cur].parent) {
      if (cur == ancestor) return true;
    }
    return false;
  }

  void set_parent(int child, int parent, const EdgeTiming& timing) {
    PlanNode& c = nodes_[child];
    if (c.parent >= 0) {
      auto& siblings = nodes_[c.parent].children;
      siblings.erase(std::find(siblings.begin(), siblings.end(), child));
    }
    c.parent = parent;
    c.incoming = timing;
    c.t_arr = timing.t_c;
    nodes_[parent].children.push_back(child);
  }

  /// Moves the root's arrival time (test hook for cascades).
  void set_arrival(int node, double t_arr) {
    nodes_[node].t_arr = t_arr;
    nodes_[node].incoming.t_c = t_arr;
  }

  /// Re-times the descendants of root breadth-first, at most `levels` deep.
  /// Nodes whose edge became infeasible get an infinite arrival time; deeper
  /// descendants keep their previous (stale) times.
  void rewire_cascade(int root, int levels) {
    std::vector<int> frontier = nodes_[root].children;
    std::vector<int> next;
    for (int level = 0; level < levels && !frontier.empty(); ++level) {
      next.clear();
      for (int id : frontier) {
        PlanNode& n = nodes_[id];
        if (const auto timing = evaluate(n.parent, id)) {
          n.incoming = *timing;
          n.t_arr = timing->t_c;
        } else {
          n.t_arr = kInfinity;
        }
        next.insert(next.end(), n.children.begin(), n.children.end());
      }
      frontier.swap(next);
    }
  }

  /// Node indices from the root to `node`.
  std::vector<int> lineage(int node) const {
    std::vector<int> out;
    for (int cur = node; cur >= 0; cur = nodes_[cur].parent) out.push_back(cur);
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  static std::uint64_t key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
  }
  static std::pair<int, int> unkey(std::uint64_t k) {
    return {static_cast<int>(k >> 32), static_cast<int>(k & 0xffffffffu)};
  }

  const EdgeModel* model_;
  std::vector<PlanNode> nodes_;
  std::unordered_map<std::uint64_t, EdgeRecord> cache_;
  std::vector<std::uint64_t> recent_keys_;  // cache entries created since the last add_detached
  EdgeAvoidance start_hold_;
  std::size_t evaluations_ = 0;
};

template <typename EdgeModel>
void rewire_cascade(PlanGraph<EdgeModel>& graph, int root, int n_c) {
  graph.rewire_cascade(root, n_c);
}

struct PathSolution {
  std::vector<Configuration> waypoints;
  std::vector<EdgeTiming> timings;
  double estimated_duration = 0.0;
  std::vector<double> cost_history;
};

struct PlanDiagnostics {
  int iterations = 0;
  int nodes = 0;
  std::size_t cached_edges = 0;
  std::size_t edge_evaluations = 0;
  int goal_nodes = 0;
  double best_partial_cost = kInfinity;  // earliest arrival among all nodes closest to the goal
  std::string reason;
};

struct PlanOutcome {
  std::optional<PathSolution> solution;
  PlanDiagnostics diagnostics;
  std::vector<double> cost_history;  // best goal arrival after each iteration

  bool feasible() const { return solution.has_value(); }
};

/// Times a waypoint sequence from the start: each edge departs at the
/// earliest safe time after the previous arrival, and earlier edges (or the
/// start hold) are stretched to cover the wait. Empty if any edge is blocked.
template <typename EdgeModel>
std::optional<std::vector<EdgeTiming>> time_waypoints(const EdgeModel& model,
                                                      const std::vector<Configuration>& waypoints) {
  std::vector<EdgeTiming> timings;
  if (waypoints.empty()) return timings;
  EdgeAvoidance previous = model.hold(waypoints.front());
  double previous_start = 0.0;
  double t = 0.0;
  bool at_start = true;
  for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
    EdgeAvoidance avoid = model.avoidance(waypoints[k], waypoints[k + 1]);
    const auto timing = model.timing(waypoints[k], waypoints[k + 1], avoid, t);
    if (!timing) return std::nullopt;
    if (at_start || timing->t_p > t) {
      if (any_overlap(previous.intervals, previous_start, timing->t_p) || timing->t_p > previous.last_pass) {
        return std::nullopt;
      }
    }
    timings.push_back(*timing);
    previous = std::move(avoid);
    previous_start = timing->t_p;
    t = timing->t_c;
    at_start = false;
  }
  return timings;
}

/// Path to `goal_node` with its edge timings recomputed forward from the start.
template <typename EdgeModel>
std::optional<PathSolution> extract_path(const PlanGraph<EdgeModel>& graph, int goal_node) {
  PathSolution sol;
  for (int id : graph.lineage(goal_node)) sol.waypoints.push_back(graph.node(id).q);
  auto timings = time_waypoints(graph.model(), sol.waypoints);
  if (!timings) return std::nullopt;
  sol.timings = std::move(*timings);
  sol.estimated_duration = sol.timings.empty() ? 0.0 : sol.timings.back().t_c;
  return sol;
}

/// Minimum-arrival node within `tolerance` of goal, or -1.
template <typename EdgeModel>
int best_goal_node(const PlanGraph<EdgeModel>& graph, const Configuration& goal, double tolerance) {
  int best = -1;
  for (int i = 0; i < graph.size(); ++i) {
    const auto& n = graph.node(i);
    if ((n.q - goal).norm() > tolerance || !std::isfinite(n.t_arr)) continue;
    if (best < 0 || n.t_arr < graph.node(best).t_arr) best = i;
  }
  return best;
}

namespace detail {

inline constexpr double kImprovementEps = 1e-9;

struct Candidate {
  double bound;
  int node;
};

}  // namespace detail

/// Time-aware RRT* over the box [lower, upper]. Nodes are attached to the
/// neighbor giving the earliest arrival; neighbors are rewired through a new
/// node when that makes them arrive earlier, with descendant re-timing down
/// cfg.n_c levels; every neighbor is then offered a better parent within the
/// neighborhood.
template <typename EdgeModel>
PlanOutcome plan_with(const EdgeModel& model, const Configuration& lower, const Configuration& upper,
                      const Configuration& start, const Configuration& goal, const PlannerConfig& cfg) {
  cfg.validate();
  const auto dim = start.size();
  if (goal.size() != dim || lower.size() != dim || upper.size() != dim) {
    throw InvalidInput("start, goal and limits must share one dimension");
  }
  auto in_box = [&](const Configuration& q) {
    return (q.array() >= lower.array() - 1e-12).all() && (q.array() <= upper.array() + 1e-12).all();
  };
  if (!in_box(start) || !in_box(goal)) throw InvalidInput("start or goal outside joint limits");

  PlanOutcome out;
  PlanGraph<EdgeModel> graph(model);
  graph.add_root(start);
  std::vector<int> goal_nodes;
  if ((start - goal).norm() <= cfg.goal_tolerance) goal_nodes.push_back(0);

  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double best = kInfinity;
  std::vector<int> neighbors;
  std::vector<detail::Candidate> candidates;

  auto lower_bound_via = [&](int from, int to) { return graph.node(from).t_arr + graph.nominal(from, to); };

  // Offers `node` every parent in `pool` that would make it arrive earlier.
  auto upgrade_parent = [&](int node, const std::vector<int>& pool) {
    candidates.clear();
    for (int p : pool) {
      if (p == node || p == graph.node(node).parent) continue;
      const double bound = lower_bound_via(p, node);
      if (bound < graph.node(node).t_arr - detail::kImprovementEps) candidates.push_back({bound, p});
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const auto& a, const auto& b) { return a.bound < b.bound || (a.bound == b.bound && a.node < b.node); });
    for (const auto& c : candidates) {
      if (c.bound >= graph.node(node).t_arr - detail::kImprovementEps) break;
      if (graph.is_ancestor(node, c.node)) continue;
      const auto timing = graph.evaluate(c.node, node);
      if (timing && timing->t_c < graph.node(node).t_arr - detail::kImprovementEps) {
        graph.set_parent(node, c.node, *timing);
        graph.rewire_cascade(node, cfg.n_c);
        return true;
      }
    }
    return false;
  };

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Configuration sample(dim);
    if (unit(rng) < cfg.goal_bias) {
      sample = goal;
    } else {
      for (Eigen::Index i = 0; i < dim; ++i) sample[i] = lower[i] + unit(rng) * (upper[i] - lower[i]);
    }

    int nearest = 0;
    double nearest_d = kInfinity;
    for (int i = 0; i < graph.size(); ++i) {
      const double d = (graph.node(i).q - sample).squaredNorm();
      if (d < nearest_d) {
        nearest_d = d;
        nearest = i;
      }
    }
    nearest_d = std::sqrt(nearest_d);
    Configuration q_new = sample;
    if (nearest_d > cfg.steer_step) {
      q_new = graph.node(nearest).q + (cfg.steer_step / nearest_d) * (sample - graph.node(nearest).q);
    }
    if ((q_new - graph.node(nearest).q).norm() < 1e-9) {
      out.cost_history.push_back(best);
      continue;
    }

    // k nearest existing nodes.
    const int existing = graph.size();
    const int k = std::min(existing, std::max(1, static_cast<int>(std::ceil(
                                                     cfg.neighbor_factor * std::log(existing + 1.0)))));
    neighbors.resize(existing);
    std::iota(neighbors.begin(), neighbors.end(), 0);
    std::vector<double> dist(existing);
    for (int i = 0; i < existing; ++i) dist[i] = (graph.node(i).q - q_new).squaredNorm();
    std::partial_sort(neighbors.begin(), neighbors.begin() + k, neighbors.end(),
                      [&](int a, int b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    neighbors.resize(k);

    const int v_new = graph.add_detached(q_new);

    // Parent choice: cheapest nominal bound first, stop once no bound can win.
    candidates.clear();
    for (int p : neighbors) {
      if (std::isfinite(graph.node(p).t_arr)) candidates.push_back({lower_bound_via(p, v_new), p});
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const auto& a, const auto& b) { return a.bound < b.bound || (a.bound == b.bound && a.node < b.node); });
    int parent = -1;
    EdgeTiming parent_timing;
    for (const auto& c : candidates) {
      if (parent >= 0 && c.bound >= parent_timing.t_c) break;
      const auto timing = graph.evaluate(c.node, v_new);
      if (timing && (parent < 0 || timing->t_c < parent_timing.t_c)) {
        parent = c.node;
        parent_timing = *timing;
      }
    }
    if (parent < 0) {
      graph.pop_detached();
      out.cost_history.push_back(best);
      continue;
    }
    graph.set_parent(v_new, parent, parent_timing);
    if ((q_new - goal).norm() <= cfg.goal_tolerance) goal_nodes.push_back(v_new);

    // Rewire neighbors through the new node.
    for (int near : neighbors) {
      if (near == parent || near == 0) continue;
      if (lower_bound_via(v_new, near) >= graph.node(near).t_arr - detail::kImprovementEps) continue;
      if (graph.is_ancestor(near, v_new)) continue;
      const auto timing = graph.evaluate(v_new, near);
      if (timing && timing->t_c < graph.node(near).t_arr - detail::kImprovementEps) {
        graph.set_parent(near, v_new, *timing);
        graph.rewire_cascade(near, cfg.n_c);
      }
    }

    // Parent upgrades inside the neighborhood.
    neighbors.push_back(v_new);
    for (int near : neighbors) {
      if (near != 0) upgrade_parent(near, neighbors);
    }

    // Track the best verified solution.
    for (int g : goal_nodes) {
      const double t_goal = graph.node(g).t_arr;
      if (!(t_goal < best - detail::kImprovementEps)) continue;
      if (auto sol = extract_path(graph, g); sol && sol->estimated_duration < best - detail::kImprovementEps) {
        best = sol->estimated_duration;
        out.solution = std::move(sol);
      }
    }
    out.cost_history.push_back(best);
  }

  out.diagnostics.iterations = cfg.max_iterations;
  out.diagnostics.nodes = graph.size();
  out.diagnostics.cached_edges = graph.cached_edges();
  out.diagnostics.edge_evaluations = graph.evaluations();
  out.diagnostics.goal_nodes = static_cast<int>(goal_nodes.size());
  {
    double closest = kInfinity;
    for (const auto& n : graph.nodes()) {
      const double d = (n.q - goal).norm();
      if (d < closest - 1e-12) {
        closest = d;
        out.diagnostics.best_partial_cost = n.t_arr;
      } else if (std::abs(d - closest) <= 1e-12) {
        out.diagnostics.best_partial_cost = std::min(out.diagnostics.best_partial_cost, n.t_arr);
      }
    }
  }
  if (out.solution) {
    out.solution->cost_history = out.cost_history;
  } else {
    out.diagnostics.reason = goal_nodes.empty() ? "goal never connected" : "goal connections infeasible";
  }
  return out;
}

/// Plans a minimum expected-duration path from start to goal.
inline PlanOutcome plan(const OccupancyMap& map, const RobotModel& robot, const Configuration& start,
                        const Configuration& goal, const PlannerConfig& cfg, const SsmParams& ssm) {
  robot.validate();
  ssm.validate();
  const StapEdgeModel model(map, robot, ssm);
  return plan_with(model, robot.lower(), robot.upper(), start, goal, cfg);
}

}  // namespace stap

#endif  // STAP_PLANNER_HPP
