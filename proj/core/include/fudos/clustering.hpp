#pragma once

#include <array>
#include <vector>

namespace fudos {

/// Cluster ids per input point, contiguous 0..k-1, ordered by each
/// cluster's smallest member index. Every point gets a label: points
/// classic DBSCAN would call noise are grouped by eps-connectivity among
/// themselves instead (singletons allowed).
struct ClusterAssignment {
  std::vector<int> labels;
  int k = 0;
  double eps = 0.0;
  int min_pts = 0;
};

/// Density-based clustering under Euclidean distance (neighborhood radius
/// eps, inclusive). Points must be distinct; the scan order is canonical so
/// the partition does not depend on input ordering.
ClusterAssignment density_cluster(const std::vector<std::array<double, 3>>& points, double eps,
                                  int min_pts);

/// 1D convenience: grid indices as points on a line.
ClusterAssignment density_cluster_1d(const std::vector<int>& indices, double eps, int min_pts);

}  // namespace fudos
