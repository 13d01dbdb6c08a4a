#include <doctest.h>

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "fudos/clustering.hpp"
#include "fudos/common.hpp"
#include "fudos/rng.hpp"

using namespace fudos;

namespace {

using Point = std::array<double, 3>;

/// BFS connected components of the eps-threshold graph.
std::vector<std::set<int>> bfs_components(const std::vector<Point>& pts, double eps) {
  const int n = static_cast<int>(pts.size());
  std::vector<bool> seen(n, false);
  std::vector<std::set<int>> comps;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::set<int> comp;
    std::deque<int> frontier = {s};
    seen[s] = true;
    while (!frontier.empty()) {
      const int i = frontier.front();
      frontier.pop_front();
      comp.insert(i);
      for (int j = 0; j < n; ++j) {
        if (seen[j]) continue;
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) d2 += (pts[i][a] - pts[j][a]) * (pts[i][a] - pts[j][a]);
        if (d2 <= eps * eps) {
          seen[j] = true;
          frontier.push_back(j);
        }
      }
    }
    comps.push_back(std::move(comp));
  }
  return comps;
}

std::vector<std::set<int>> partition_of(const ClusterAssignment& a) {
  std::vector<std::set<int>> clusters(a.k);
  for (std::size_t i = 0; i < a.labels.size(); ++i) clusters[a.labels[i]].insert(static_cast<int>(i));
  return clusters;
}

/// Canonical form for comparing partitions across reorderings: a sorted
/// set of coordinate sets.
std::set<std::set<std::array<double, 3>>> canon(const std::vector<Point>& pts,
                                                const ClusterAssignment& a) {
  std::map<int, std::set<Point>> by_label;
  for (std::size_t i = 0; i < pts.size(); ++i) by_label[a.labels[i]].insert(pts[i]);
  std::set<std::set<Point>> out;
  for (auto& [label, members] : by_label) out.insert(members);
  return out;
}

}  // namespace

TEST_CASE("two well-separated groups form two clusters") {
  std::vector<Point> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({static_cast<double>(i), 0.0, 0.0});
  for (int i = 0; i < 5; ++i) pts.push_back({static_cast<double>(i) + 20.0, 0.0, 0.0});
  const ClusterAssignment a = density_cluster(pts, 1.5, 2);
  CHECK(a.k == 2);
  for (int i = 0; i < 5; ++i) {
    CHECK(a.labels[i] == a.labels[0]);
    CHECK(a.labels[i + 5] == a.labels[5]);
  }
  CHECK(a.labels[0] != a.labels[5]);
}

TEST_CASE("an isolated point becomes its own cluster, not noise") {
  std::vector<Point> pts;
  for (int i = 0; i < 8; ++i) pts.push_back({i * 0.5, 0.0, 0.0});
  pts.push_back({100.0, 100.0, 100.0});
  const ClusterAssignment a = density_cluster(pts, 1.0, 3);
  CHECK(a.k == 2);
  CHECK(a.labels[8] != a.labels[0]);
  // Every point labeled, labels contiguous.
  for (int label : a.labels) {
    CHECK(label >= 0);
    CHECK(label < a.k);
  }
}

TEST_CASE("min_pts=1 equals eps-threshold connected components (BFS oracle)") {
  Rng rng(314);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point> pts;
    std::set<Point> used;
    const int n = 30 + static_cast<int>(rng.below(40));
    while (static_cast<int>(pts.size()) < n) {
      Point p{static_cast<double>(rng.below(18)), static_cast<double>(rng.below(18)),
              static_cast<double>(rng.below(4))};
      if (used.insert(p).second) pts.push_back(p);
    }
    const double eps = 1.0 + rng.uniform() * 2.0;
    const ClusterAssignment a = density_cluster(pts, eps, 1);
    const auto ours = partition_of(a);
    auto oracle = bfs_components(pts, eps);
    CHECK(ours.size() == oracle.size());
    std::set<std::set<int>> ours_set(ours.begin(), ours.end());
    std::set<std::set<int>> oracle_set(oracle.begin(), oracle.end());
    CHECK(ours_set == oracle_set);
  }
}

TEST_CASE("partition is invariant to input reordering") {
  Rng rng(2718);
  std::vector<Point> pts;
  std::set<Point> used;
  while (pts.size() < 40) {
    Point p{static_cast<double>(rng.below(12)), static_cast<double>(rng.below(12)), 0.0};
    if (used.insert(p).second) pts.push_back(p);
  }
  const ClusterAssignment a = density_cluster(pts, 2.0, 3);

  std::vector<Point> shuffled = pts;
  for (int i = static_cast<int>(shuffled.size()) - 1; i > 0; --i) {
    std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
  }
  const ClusterAssignment b = density_cluster(shuffled, 2.0, 3);
  CHECK(canon(pts, a) == canon(shuffled, b));
}

TEST_CASE("labels are canonical: cluster 0 holds the smallest input index") {
  std::vector<Point> pts = {{50.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {51.0, 0.0, 0.0},
                            {1.0, 0.0, 0.0}};
  const ClusterAssignment a = density_cluster(pts, 2.0, 1);
  CHECK(a.k == 2);
  CHECK(a.labels[0] == 0);  // first input point defines label 0
  CHECK(a.labels[2] == 0);
  CHECK(a.labels[1] == 1);
  CHECK(a.labels[3] == 1);
}

TEST_CASE("decreasing eps never merges separate clusters (min_pts=1)") {
  Rng rng(1618);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Point> pts;
    std::set<Point> used;
    while (pts.size() < 30) {
      Point p{static_cast<double>(rng.below(15)), static_cast<double>(rng.below(15)), 0.0};
      if (used.insert(p).second) pts.push_back(p);
    }
    const ClusterAssignment coarse = density_cluster(pts, 3.0, 1);
    const ClusterAssignment fine = density_cluster(pts, 1.5, 1);
    // Refinement: every fine cluster sits inside one coarse cluster.
    for (const auto& fine_cluster : partition_of(fine)) {
      std::set<int> owners;
      for (int i : fine_cluster) owners.insert(coarse.labels[i]);
      CHECK(owners.size() == 1);
    }
  }
}

TEST_CASE("every input point appears in exactly one cluster") {
  Rng rng(999);
  std::vector<Point> pts;
  std::set<Point> used;
  while (pts.size() < 50) {
    Point p{static_cast<double>(rng.below(10)), static_cast<double>(rng.below(10)),
            static_cast<double>(rng.below(3))};
    if (used.insert(p).second) pts.push_back(p);
  }
  const ClusterAssignment a = density_cluster(pts, 2.0, 4);
  auto clusters = partition_of(a);
  std::size_t total = 0;
  for (const auto& c : clusters) {
    CHECK(!c.empty());
    total += c.size();
  }
  CHECK(total == pts.size());
}

TEST_CASE("1D clustering merges near-contiguous runs") {
  const std::vector<int> stable = {10, 11, 12, 14, 15, 40, 41, 42, 90};
  const ClusterAssignment a = density_cluster_1d(stable, 2.0, 2);
  CHECK(a.k == 3);
  CHECK(a.labels[0] == a.labels[4]);  // 10..15 bridged across the gap at 13
  CHECK(a.labels[5] == a.labels[7]);
  CHECK(a.labels[8] != a.labels[0]);
  CHECK(a.labels[8] != a.labels[5]);
}

TEST_CASE("empty input and validation") {
  CHECK(density_cluster({}, 1.0, 2).k == 0);
  CHECK_THROWS_AS(density_cluster({{0, 0, 0}}, 0.0, 2), ConfigError);
  CHECK_THROWS_AS(density_cluster({{0, 0, 0}}, 1.0, 0), ConfigError);
  CHECK_THROWS_AS(density_cluster({{1, 1, 1}, {1, 1, 1}}, 1.0, 1), ConfigError);  // duplicates
}
