#include "fudos/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <unordered_map>

#include "fudos/common.hpp"

namespace fudos {

namespace {

/// Uniform-grid neighborhood index with cell size eps: all neighbors of a
/// point lie in the 3x3x3 block of cells around it.
class NeighborIndex {
 public:
  NeighborIndex(const std::vector<std::array<double, 3>>& pts, double eps)
      : pts_(pts), eps_(eps) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      buckets_[key(cell(pts[i]))].push_back(static_cast<int>(i));
    }
  }

  std::vector<int> query(int i) const {
    std::vector<int> out;
    const auto c = cell(pts_[i]);
    const double eps2 = eps_ * eps_;
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const auto it = buckets_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == buckets_.end()) continue;
          for (int j : it->second) {
            double d2 = 0.0;
            for (int a = 0; a < 3; ++a) {
              const double d = pts_[i][a] - pts_[j][a];
              d2 += d * d;
            }
            if (d2 <= eps2) out.push_back(j);
          }
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::array<std::int64_t, 3> cell(const std::array<double, 3>& p) const {
    return {static_cast<std::int64_t>(std::floor(p[0] / eps_)),
            static_cast<std::int64_t>(std::floor(p[1] / eps_)),
            static_cast<std::int64_t>(std::floor(p[2] / eps_))};
  }
  static std::uint64_t key(const std::array<std::int64_t, 3>& c) {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : c) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL;
      h *= 1099511628211ULL;
    }
    return h;
  }

  const std::vector<std::array<double, 3>>& pts_;
  double eps_;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

}  // namespace

ClusterAssignment density_cluster(const std::vector<std::array<double, 3>>& points, double eps,
                                  int min_pts) {
  if (!(eps > 0.0)) throw ConfigError("clustering eps must be positive");
  if (min_pts < 1) throw ConfigError("clustering min_pts must be >= 1");
  const int n = static_cast<int>(points.size());
  ClusterAssignment out;
  out.eps = eps;
  out.min_pts = min_pts;
  if (n == 0) return out;

  // Canonical processing order: lexicographic by coordinates, so border
  // point assignment (and hence the partition) is input-order independent.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return points[a] < points[b]; });
  for (int i = 1; i < n; ++i) {
    if (points[order[i]] == points[order[i - 1]]) {
      throw ConfigError("clustering input contains duplicate points");
    }
  }

  const NeighborIndex index(points, eps);
  std::vector<bool> is_core(n, false);
  std::vector<std::vector<int>> neighbors(n);
  for (int i = 0; i < n; ++i) {
    neighbors[i] = index.query(i);
    is_core[i] = static_cast<int>(neighbors[i].size()) >= min_pts;
  }

  constexpr int kUnvisited = -2, kNoise = -1;
  std::vector<int> labels(n, kUnvisited);
  int next = 0;

  for (int oi : order) {
    if (labels[oi] != kUnvisited) continue;
    if (!is_core[oi]) {
      labels[oi] = kNoise;
      continue;
    }
    const int cluster = next++;
    labels[oi] = cluster;
    std::deque<int> frontier(neighbors[oi].begin(), neighbors[oi].end());
    while (!frontier.empty()) {
      const int j = frontier.front();
      frontier.pop_front();
      if (labels[j] == kNoise) labels[j] = cluster;  // border point
      if (labels[j] != kUnvisited) continue;
      labels[j] = cluster;
      if (is_core[j]) {
        frontier.insert(frontier.end(), neighbors[j].begin(), neighbors[j].end());
      }
    }
  }

  // Would-be noise points form eps-connected groups of their own.
  for (int oi : order) {
    if (labels[oi] != kNoise) continue;
    const int cluster = next++;
    labels[oi] = cluster;
    std::deque<int> frontier;
    frontier.push_back(oi);
    while (!frontier.empty()) {
      const int j = frontier.front();
      frontier.pop_front();
      for (int nb : neighbors[j]) {
        if (labels[nb] == kNoise) {
          labels[nb] = cluster;
          frontier.push_back(nb);
        }
      }
    }
  }

  // Relabel so cluster 0 holds the smallest original index.
  std::map<int, int> remap;
  for (int i = 0; i < n; ++i) {
    if (!remap.count(labels[i])) {
      const int id = static_cast<int>(remap.size());
      remap[labels[i]] = id;
    }
  }
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) out.labels[i] = remap[labels[i]];
  out.k = static_cast<int>(remap.size());
  return out;
}

ClusterAssignment density_cluster_1d(const std::vector<int>& indices, double eps, int min_pts) {
  std::vector<std::array<double, 3>> pts;
  pts.reserve(indices.size());
  for (int idx : indices) pts.push_back({static_cast<double>(idx), 0.0, 0.0});
  return density_cluster(pts, eps, min_pts);
}

}  // namespace fudos
