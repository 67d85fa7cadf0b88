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

#ifndef STAP_INTERVAL_HPP
#define STAP_INTERVAL_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stap/common.hpp"

namespace stap {

/// Closed time interval [t_s, t_f] during which a point is predicted to be
/// occupied. t_f may be +inf when the occupancy persists past the end of the
/// prediction.
struct AvoidanceInterval {
  double t_s = 0.0;
  double t_f = 0.0;

  bool open_ended() const { return std::isinf(t_f); }

  /// True when [lo, hi] shares at least one instant with this interval.
  bool overlaps(double lo, double hi) const { return t_s <= hi && lo <= t_f; }

  friend bool operator==(const AvoidanceInterval&, const AvoidanceInterval&) = default;
};

using IntervalList = std::vector<AvoidanceInterval>;

inline std::string to_string(const AvoidanceInterval& iv) {
  return "[" + std::to_string(iv.t_s) + ", " +
         (iv.open_ended() ? std::string("inf)") : std::to_string(iv.t_f) + "]");
}

/// Sorted by start time and pairwise disjoint (touching closed intervals count
/// as overlapping and must have been merged).
inline bool is_sorted_disjoint(std::span<const AvoidanceInterval> intervals) {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].t_s > intervals[i].t_f) return false;
    if (i > 0 && intervals[i - 1].t_f >= intervals[i].t_s) return false;
  }
  return true;
}

/// Sorts and coalesces overlapping or touching intervals in place.
inline void normalize_intervals(IntervalList& intervals) {
  if (intervals.size() < 2) return;
  std::sort(intervals.begin(), intervals.end(),
            [](const AvoidanceInterval& a, const AvoidanceInterval& b) {
              return a.t_s < b.t_s || (a.t_s == b.t_s && a.t_f < b.t_f);
            });
  std::size_t out = 0;
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    if (intervals[i].t_s <= intervals[out].t_f) {
      intervals[out].t_f = std::max(intervals[out].t_f, intervals[i].t_f);
    } else {
      intervals[++out] = intervals[i];
    }
  }
  intervals.resize(out + 1);
}

/// Union of two sorted disjoint lists; the result is sorted and disjoint.
inline IntervalList union_intervals(std::span<const AvoidanceInterval> lhs,
                                    std::span<const AvoidanceInterval> rhs) {
  IntervalList merged;
  merged.reserve(lhs.size() + rhs.size());
  std::size_t i = 0;
  std::size_t j = 0;
  auto push = [&merged](const AvoidanceInterval& iv) {
    if (!merged.empty() && iv.t_s <= merged.back().t_f) {
      merged.back().t_f = std::max(merged.back().t_f, iv.t_f);
    } else {
      merged.push_back(iv);
    }
  };
  while (i < lhs.size() || j < rhs.size()) {
    const bool take_lhs = j >= rhs.size() || (i < lhs.size() && lhs[i].t_s <= rhs[j].t_s);
    push(take_lhs ? lhs[i++] : rhs[j++]);
  }
  return merged;
}

/// First interval in a sorted disjoint list that overlaps [lo, hi], or end.
inline auto first_overlap(std::span<const AvoidanceInterval> intervals, double lo, double hi) {
  auto it = std::partition_point(intervals.begin(), intervals.end(),
                                 [lo](const AvoidanceInterval& iv) { return iv.t_f < lo; });
  if (it != intervals.end() && !it->overlaps(lo, hi)) return intervals.end();
  return it;
}

inline bool any_overlap(std::span<const AvoidanceInterval> intervals, double lo, double hi) {
  return first_overlap(intervals, lo, hi) != intervals.end();
}

/// Membership of instant t in the union of a sorted disjoint list.
inline bool contains_time(std::span<const AvoidanceInterval> intervals, double t) {
  return any_overlap(intervals, t, t);
}

}  // namespace stap

#endif  // STAP_INTERVAL_HPP
