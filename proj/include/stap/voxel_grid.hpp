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

#ifndef STAP_VOXEL_GRID_HPP
#define STAP_VOXEL_GRID_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "stap/common.hpp"

namespace stap {

using VoxelIndex = std::int64_t;
using VoxelSet = std::vector<VoxelIndex>;  // sorted, unique

/// Axis-aligned workspace discretization. Cell (i, j, k) covers
/// origin + [i, i+1) * resolution along x, and likewise for y and z.
class VoxelGrid {
 public:
  VoxelGrid() = default;

  VoxelGrid(Vec3 origin, double resolution, std::array<int, 3> dims)
      : origin_(std::move(origin)), resolution_(resolution), dims_(dims) {
    if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
      throw InvalidInput("voxel grid resolution must be positive");
    }
    for (int d : dims_) {
      if (d < 1) throw InvalidInput("voxel grid dimensions must be >= 1");
    }
  }

  /// Grid covering the box [lower, upper] (upper rounded outward).
  static VoxelGrid covering(const Vec3& lower, const Vec3& upper, double resolution) {
    if (!(resolution > 0.0)) throw InvalidInput("voxel grid resolution must be positive");
    std::array<int, 3> dims{};
    for (int a = 0; a < 3; ++a) {
      const double extent = upper[a] - lower[a];
      if (!(extent > 0.0)) throw InvalidInput("voxel grid bounds are empty");
      dims[a] = static_cast<int>(std::ceil(extent / resolution - 1e-9));
    }
    return VoxelGrid(lower, resolution, dims);
  }

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const std::array<int, 3>& dims() const { return dims_; }
  VoxelIndex size() const {
    return static_cast<VoxelIndex>(dims_[0]) * dims_[1] * dims_[2];
  }
  Vec3 upper() const {
    return origin_ + resolution_ * Vec3(dims_[0], dims_[1], dims_[2]);
  }

  bool in_bounds(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims_[0] && j < dims_[1] && k < dims_[2];
  }

  VoxelIndex linear(int i, int j, int k) const {
    return i + static_cast<VoxelIndex>(dims_[0]) * (j + static_cast<VoxelIndex>(dims_[1]) * k);
  }

  std::array<int, 3> cell(VoxelIndex idx) const {
    const int i = static_cast<int>(idx % dims_[0]);
    const VoxelIndex rest = idx / dims_[0];
    return {i, static_cast<int>(rest % dims_[1]), static_cast<int>(rest / dims_[1])};
  }

  Vec3 center(int i, int j, int k) const {
    return origin_ + resolution_ * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  Vec3 center(VoxelIndex idx) const {
    const auto c = cell(idx);
    return center(c[0], c[1], c[2]);
  }

  /// Cell coordinates of the cell containing p, possibly out of bounds.
  std::array<int, 3> cell_of(const Vec3& p) const {
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) {
      c[a] = static_cast<int>(std::floor((p[a] - origin_[a]) / resolution_));
    }
    return c;
  }

  std::optional<VoxelIndex> index_of(const Vec3& p) const {
    const auto c = cell_of(p);
    if (!in_bounds(c[0], c[1], c[2])) return std::nullopt;
    return linear(c[0], c[1], c[2]);
  }

  /// Calls fn(i, j, k) for every in-bounds cell whose center may lie inside
  /// the box [lo, hi].
  template <typename Fn>
  void for_each_cell_in_box(const Vec3& lo, const Vec3& hi, Fn&& fn) const {
    std::array<int, 3> first{};
    std::array<int, 3> last{};
    for (int a = 0; a < 3; ++a) {
      first[a] = std::max(0, static_cast<int>(std::floor((lo[a] - origin_[a]) / resolution_ - 0.5)));
      last[a] = std::min(dims_[a] - 1,
                         static_cast<int>(std::ceil((hi[a] - origin_[a]) / resolution_ - 0.5)));
      if (first[a] > last[a]) return;
    }
    for (int k = first[2]; k <= last[2]; ++k) {
      for (int j = first[1]; j <= last[1]; ++j) {
        for (int i = first[0]; i <= last[0]; ++i) fn(i, j, k);
      }
    }
  }

  friend bool operator==(const VoxelGrid& a, const VoxelGrid& b) {
    return a.origin_ == b.origin_ && a.resolution_ == b.resolution_ && a.dims_ == b.dims_;
  }

 private:
  Vec3 origin_ = Vec3::Zero();
  double resolution_ = 0.05;
  std::array<int, 3> dims_{1, 1, 1};
};

/// Squared distance from p to the segment [a, b]; a == b degenerates to a point.
inline double squared_distance_to_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = 0.0;
  if (len2 > 0.0) s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (a + s * ab - p).squaredNorm();
}

inline void sort_unique(VoxelSet& voxels) {
  std::sort(voxels.begin(), voxels.end());
  voxels.erase(std::unique(voxels.begin(), voxels.end()), voxels.end());
}

}  // namespace stap

#endif  // STAP_VOXEL_GRID_HPP
