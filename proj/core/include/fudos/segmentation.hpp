#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fudos/correlation.hpp"
#include "fudos/dataset.hpp"

namespace fudos {

/// Output of the sequential 1D segmentation.
///
/// `boundaries[k]` is the first grid index of segment k+1 (cut positions in
/// 1..p-1), so L = boundaries.size() + 1 segments partition [0, p).
/// error_path[j] / penalized_path[j] record the j-cut step (step 0 = no
/// cuts); penalized_path[j] = error_path[j] + rho*(j+1) exactly. The paths
/// include the first rising step when one was evaluated, so the stopping
/// decision is re-checkable from the trace alone.
struct SegmentationResult {
  std::vector<int> boundaries;
  int L = 1;
  std::vector<double> error_path;
  std::vector<double> penalized_path;
  double rho = 0.0;
  bool warn_short_domain = false;  // p < 2*minSeg: single segment forced

  std::vector<std::pair<int, int>> segment_ranges(int p) const;
};

struct SegmentationParams {
  double rho = 0.0;
  int min_seg = 5;
  int max_l = 0;  // 0 = default p / min_seg
};

/// Weighted block-approximation loss of a boundary configuration: the
/// squared gap between the full-domain integral and the sum of per-segment
/// integrals, each scaled by the inverse of the segment size in percent.
double seg_loss(const IntegralTable& table, const std::vector<int>& boundaries);

/// Greedy sequential segmentation: adds the loss-minimizing cut each step
/// (ties -> smallest index), subject to the minimum segment size, and stops
/// when the penalized loss path rises, no feasible cut remains, or L hits
/// max_l. Returns the configuration of the last non-rising step.
SegmentationResult segment_1d(const CorrMatrix& corr, const SegmentationParams& params);

/// One selectable unit of the domain: a sorted list of grid/voxel indices.
/// Segmentation produces contiguous runs; cluster-induced segments may have
/// interior gaps.
struct SegmentInfo {
  std::vector<int> points;
};
using Segments = std::vector<SegmentInfo>;

Segments to_segments(const SegmentationResult& seg, int p);

/// Axis-wise 3D segmentation assembled into cuboids and intersected with
/// the mask. Cuboids partition the masked voxel set; empty cuboids are
/// pruned (their count is retained in l_before_pruning).
struct CuboidSegments {
  std::array<std::vector<int>, 3> axis_boundaries;  // H, V, Z cut lists
  std::array<SegmentationResult, 3> axis_results;
  struct Cuboid {
    int h0, h1, v0, v1, z0, z1;  // half-open index ranges per axis
    std::vector<int> voxels;     // masked voxels inside, flat layout
  };
  std::vector<Cuboid> segments;
  int l_before_pruning = 0;

  /// Flat per-voxel segment-id map (-1 outside the mask).
  std::vector<std::int32_t> segment_map(const Dims3D& dims) const;
};

struct Segmentation3DParams {
  std::array<double, 3> rho{0.0, 0.0, 0.0};
  std::array<int, 3> min_seg{3, 3, 3};
  std::array<int, 3> max_l{0, 0, 0};
};

CuboidSegments segment_3d(const std::array<CorrMatrix, 3>& marginals,
                          const Segmentation3DParams& params, const Dims3D& dims,
                          const std::vector<std::uint8_t>& mask);

Segments to_segments(const CuboidSegments& cubes);

}  // namespace fudos
