#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <set>

#include "fudos/pipeline.hpp"
#include "fudos/rng.hpp"
#include "fudos/selection.hpp"
#include "test_util.hpp"

using namespace fudos;

namespace {

Segments contiguous_segments(int p, int n_segments) {
  Segments segments;
  const int step = p / n_segments;
  for (int s = 0; s < n_segments; ++s) {
    SegmentInfo info;
    const int end = s == n_segments - 1 ? p : (s + 1) * step;
    for (int j = s * step; j < end; ++j) info.points.push_back(j);
    segments.push_back(std::move(info));
  }
  return segments;
}

Dataset1D random_dataset(int n, int p, std::uint64_t seed) {
  Dataset1D data;
  data.grid = Grid1D::regular(p);
  Rng rng(seed);
  data.X.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) data.X(i, j) = rng.normal();
  }
  data.Y.resize(n);
  for (int i = 0; i < n; ++i) data.Y(i) = rng.normal();
  return data;
}

/// Hand-rolled leave-fold-out CV with plain OLS, no shared machinery.
double fold_loop_cv(const Dataset1D& data, const Segments& segments,
                    const std::vector<int>& subset, const FoldSplit& split) {
  const SegmentFeatures f = features(data, segments, subset);
  const int n = data.n();
  double total = 0.0;
  for (int fold = 0; fold < split.folds; ++fold) {
    std::vector<int> tr, te;
    for (int i = 0; i < n; ++i) (split.assignment[i] == fold ? te : tr).push_back(i);
    Eigen::MatrixXd D(tr.size(), subset.size() + 1);
    Eigen::VectorXd y(tr.size());
    for (std::size_t r = 0; r < tr.size(); ++r) {
      D(r, 0) = 1.0;
      for (std::size_t k = 0; k < subset.size(); ++k) D(r, k + 1) = f.F(tr[r], k);
      y(r) = data.Y(tr[r]);
    }
    const Eigen::VectorXd sol =
        D.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
    double sse = 0.0;
    for (int i : te) {
      double pred = sol(0);
      for (std::size_t k = 0; k < subset.size(); ++k) pred += f.F(i, k) * sol(k + 1);
      sse += (data.Y(i) - pred) * (data.Y(i) - pred);
    }
    total += sse / te.size();
  }
  return total / split.folds;
}

/// All non-empty subsets of {0..L-1}, CV-minimal. CVs at the numerical-zero
/// floor compare as equal, and ties resolve toward smaller subsets, then
/// lexicographic order, so an exact fit names the minimal adequate subset.
std::vector<int> exhaustive_best_subset(const Dataset1D& data, const Segments& segments,
                                        const FoldSplit& split, Fitter fitter) {
  const int L = static_cast<int>(segments.size());
  const CvEngine engine(data.X, data.Y, 1.0 / data.p(), &data.grid, segments, split, fitter);
  const double floor = 1e-20 * engine.response_scale();
  const auto eff = [floor](double cv) { return cv <= floor ? 0.0 : cv; };
  std::vector<int> best;
  double best_cv = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << L); ++mask) {
    std::vector<int> subset;
    for (int s = 0; s < L; ++s) {
      if (mask & (1 << s)) subset.push_back(s);
    }
    const double cv = eff(engine.error(subset));
    if (best.empty() || cv < best_cv) {
      best = subset;
      best_cv = cv;
    } else if (cv == best_cv &&
               (subset.size() < best.size() ||
                (subset.size() == best.size() && subset < best))) {
      best = subset;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("fold split is balanced and validates") {
  const FoldSplit split = FoldSplit::random(23, 5, 99);
  split.validate(23);
  std::vector<int> sizes(5, 0);
  for (int f : split.assignment) ++sizes[f];
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  CHECK(*hi - *lo <= 1);
  CHECK_THROWS_AS(FoldSplit::random(8, 5, 1), ConfigError);
}

TEST_CASE("cv_error: noise-free linear response gives numerically zero CV") {
  Dataset1D data = random_dataset(100, 40, 41);
  const Segments segments = contiguous_segments(40, 8);
  const SegmentFeatures f = features(data, segments, {2});
  data.Y = 3.0 * f.F.col(0) + Eigen::VectorXd::Constant(100, 0.5);
  const FoldSplit split = FoldSplit::random(100, 5, 7);
  const double cv = cv_error(data, segments, {2}, split, Fitter::kPwc);
  const double var = (data.Y.array() - data.Y.mean()).square().mean();
  CHECK(cv < 1e-8 * var);
}

TEST_CASE("cv_error matches the hand-rolled fold-loop oracle") {
  Dataset1D data = random_dataset(60, 36, 43);
  const Segments segments = contiguous_segments(36, 6);
  const FoldSplit split = FoldSplit::random(60, 5, 17);
  for (const auto& subset : std::vector<std::vector<int>>{{0}, {1, 4}, {0, 2, 5}}) {
    const double fast = cv_error(data, segments, subset, split, Fitter::kPwc);
    const double oracle = fold_loop_cv(data, segments, subset, split);
    CHECK(fast == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("cv_error is invariant to permuting samples with their folds") {
  Dataset1D data = random_dataset(50, 24, 47);
  const Segments segments = contiguous_segments(24, 4);
  const FoldSplit split = FoldSplit::random(50, 5, 23);
  const double base = cv_error(data, segments, {1, 3}, split, Fitter::kPwc);

  // Permute rows and carry the fold ids along.
  std::vector<int> perm(50);
  for (int i = 0; i < 50; ++i) perm[i] = (i * 17 + 3) % 50;
  Dataset1D shuffled = data;
  FoldSplit shuffled_split = split;
  for (int i = 0; i < 50; ++i) {
    shuffled.X.row(i) = data.X.row(perm[i]);
    shuffled.Y(i) = data.Y(perm[i]);
    shuffled_split.assignment[i] = split.assignment[perm[i]];
  }
  const double permuted = cv_error(shuffled, segments, {1, 3}, shuffled_split, Fitter::kPwc);
  CHECK(permuted == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("cv_error rejects folds with fewer than 2 samples") {
  Dataset1D data = random_dataset(12, 20, 51);
  const Segments segments = contiguous_segments(20, 4);
  FoldSplit split;
  split.folds = 5;
  split.assignment.assign(12, 0);
  split.assignment[0] = 1;  // fold 1 has one sample, folds 2..4 none
  for (int i = 1; i < 12; ++i) split.assignment[i] = i % 4;
  CHECK_THROWS_AS(cv_error(data, segments, {0}, split, Fitter::kPwc), ConfigError);
}

TEST_CASE("select_subset: single segment short-circuits") {
  Dataset1D data = random_dataset(40, 20, 53);
  const Segments segments = contiguous_segments(20, 1);
  SelectionConfig cfg;
  cfg.q = 10;
  cfg.seed = 3;
  const SelectionTrace trace = select_subset(data, segments, cfg);
  CHECK(trace.selected == std::vector<int>{0});
  CHECK(trace.steps.size() == 1);
}

TEST_CASE("select_subset: c near 1 stops after step 1") {
  Dataset1D data = random_dataset(80, 40, 55);
  const Segments segments = contiguous_segments(40, 8);
  SelectionConfig cfg;
  cfg.c = 0.999;
  cfg.q = 40;
  cfg.seed = 5;
  const SelectionTrace trace = select_subset(data, segments, cfg);
  CHECK(trace.termination_step == 1);
  CHECK(trace.selected.size() == 1);
}

TEST_CASE("select_subset: noise-free pair {3,7} is found and matches exhaustive search") {
  const int L = 10;
  Dataset1D data = random_dataset(100, 60, 57);
  const Segments segments = contiguous_segments(60, L);
  const SegmentFeatures f = features(data, segments, {3, 7});
  data.Y = 2.0 * f.F.col(0) - 1.5 * f.F.col(1) + Eigen::VectorXd::Constant(100, 0.3);

  SelectionConfig cfg;
  cfg.c = 0.01;
  cfg.q = 30;
  cfg.seed = 11;
  const SelectionTrace trace = select_subset(data, segments, cfg);
  CHECK(trace.selected == std::vector<int>{3, 7});

  const FoldSplit split = FoldSplit::random(100, cfg.folds, cfg.seed);
  const std::vector<int> oracle = exhaustive_best_subset(data, segments, split, Fitter::kPwc);
  CHECK(trace.selected == oracle);
}

TEST_CASE("select_subset trace invariants") {
  Dataset1D data = random_dataset(90, 48, 61);
  const Segments segments = contiguous_segments(48, 8);
  const SegmentFeatures f = features(data, segments, {1, 5});
  Rng rng(62);
  data.Y = f.F.col(0) + 0.8 * f.F.col(1);
  for (int i = 0; i < 90; ++i) data.Y(i) += 0.05 * rng.normal();

  SelectionConfig cfg;
  cfg.c = 0.01;
  cfg.q = 24;
  cfg.seed = 13;
  const SelectionTrace trace = select_subset(data, segments, cfg);

  // cv_star_path entries are the step minima.
  REQUIRE(trace.cv_star_path.size() == trace.steps.size());
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    double min_cv = std::numeric_limits<double>::infinity();
    for (const auto& cand : trace.steps[k].ranked) min_cv = std::min(min_cv, cand.cv);
    CHECK(trace.cv_star_path[k] == doctest::Approx(min_cv));
    // Ranked ascending.
    for (std::size_t i = 1; i < trace.steps[k].ranked.size(); ++i) {
      CHECK(trace.steps[k].ranked[i - 1].cv <= trace.steps[k].ranked[i].cv);
    }
  }

  // Every step k+1 candidate is a union of two step-k top-m subsets.
  const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.q))));
  for (std::size_t k = 1; k < trace.steps.size(); ++k) {
    const auto& prev = trace.steps[k - 1].ranked;
    const int top = std::min<int>(m, static_cast<int>(prev.size()));
    for (const auto& cand : trace.steps[k].ranked) {
      bool found = false;
      for (int i = 0; i < top && !found; ++i) {
        for (int j = i + 1; j < top && !found; ++j) {
          std::vector<int> u;
          std::set_union(prev[i].subset.begin(), prev[i].subset.end(), prev[j].subset.begin(),
                         prev[j].subset.end(), std::back_inserter(u));
          if (u == cand.subset) found = true;
        }
      }
      CHECK(found);
    }
  }

  // No subset evaluated twice across the whole run.
  std::set<std::vector<int>> seen;
  for (const auto& step : trace.steps) {
    for (const auto& cand : step.ranked) {
      CHECK(seen.insert(cand.subset).second);
    }
  }

  // Termination: re-check the stopping rule from the trace alone.
  const int K = trace.termination_step;
  REQUIRE(K >= 1);
  CHECK(trace.selected == trace.steps[K - 1].ranked.front().subset);
  for (int k = 1; k < K; ++k) {
    const double prev = trace.cv_star_path[k - 1];
    const double next = trace.cv_star_path[k];
    CHECK(prev - next > cfg.c * prev);  // rule not satisfied before K
  }
  if (static_cast<int>(trace.steps.size()) > K) {
    const double prev = trace.cv_star_path[K - 1];
    const double next = trace.cv_star_path[K];
    CHECK(prev - next <= cfg.c * prev);
  }
}

TEST_CASE("select_subset: with c->0 and full m the step-2 best is the best pair") {
  const int L = 6;
  Dataset1D data = random_dataset(70, 36, 63);
  const Segments segments = contiguous_segments(36, L);
  Rng rng(64);
  const SegmentFeatures f = features(data, segments, {0, 4});
  data.Y = f.F.col(0) + f.F.col(1);
  for (int i = 0; i < 70; ++i) data.Y(i) += 0.2 * rng.normal();

  SelectionConfig cfg;
  cfg.c = 1e-9;
  cfg.q = L * L;  // m = L: no truncation
  cfg.seed = 15;
  const SelectionTrace trace = select_subset(data, segments, cfg);
  REQUIRE(trace.steps.size() >= 2);

  // Brute-force best pair with the same fold split.
  const FoldSplit split = FoldSplit::random(70, cfg.folds, cfg.seed);
  const CvEngine engine(data.X, data.Y, 1.0 / 36, &data.grid, segments, split, Fitter::kPwc);
  double best_cv = std::numeric_limits<double>::infinity();
  std::vector<int> best_pair;
  for (int i = 0; i < L; ++i) {
    for (int j = i + 1; j < L; ++j) {
      const double cv = engine.error({i, j});
      if (cv < best_cv) {
        best_cv = cv;
        best_pair = {i, j};
      }
    }
  }
  CHECK(trace.steps[1].ranked.front().subset == best_pair);
}

TEST_CASE("selection config defaults follow the rule of thumb") {
  CHECK(SelectionConfig::defaults_1d(128).q == 64);
  CHECK(SelectionConfig::defaults_1d(128).fitter == Fitter::kPspline);
  CHECK(SelectionConfig::defaults_3d(4000).q == 2000);
  CHECK(SelectionConfig::defaults_3d(4000).fitter == Fitter::kPwc);
}

TEST_CASE("select_subset works with the pspline fitter") {
  Dataset1D data = sim_arma(80, 64, 71);
  const Segments segments = contiguous_segments(64, 8);
  const SegmentFeatures f = features(data, segments, {2});
  Rng rng(72);
  data.Y = 2.0 * f.F.col(0);
  for (int i = 0; i < 80; ++i) data.Y(i) += 0.01 * rng.normal();
  center(data);

  SelectionConfig cfg = SelectionConfig::defaults_1d(64);
  cfg.seed = 17;
  const SelectionTrace trace = select_subset(data, segments, cfg);
  CHECK(std::find(trace.selected.begin(), trace.selected.end(), 2) != trace.selected.end());
}
