#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "fudos/pipeline.hpp"
#include "fudos/rng.hpp"
#include "fudos/stability.hpp"

using namespace fudos;

namespace {

StabilityConfig stub_config(int pairs, int reps, std::uint64_t seed) {
  StabilityConfig cfg;
  for (int k = 0; k < pairs; ++k) cfg.grid.push_back({{0.01 * (k + 1)}, 0.01});
  cfg.reps = reps;
  cfg.master_seed = seed;
  return cfg;
}

Dataset1D case1_data(int n, int p, std::uint64_t seed) {
  Dataset1D data = sim_arma(n, p, seed);
  data.Y = gen_response(data.X, 1.0 / p, beta_1d(p), 20.0, mix_seed(seed, 9));
  center(data);
  return data;
}

}  // namespace

TEST_CASE("stub selector returning a fixed point set gives frequency one") {
  const auto selector = [](const std::vector<int>&, std::uint64_t) {
    return std::vector<std::vector<int>>{{1, 2, 3}, {7}};
  };
  const FrequencyMap map = run_stability_custom(20, 10, stub_config(2, 25, 5), selector);
  CHECK(map.freq(0, 1) == doctest::Approx(1.0));
  CHECK(map.freq(0, 2) == doctest::Approx(1.0));
  CHECK(map.freq(0, 7) == 0.0);
  CHECK(map.freq(1, 7) == doctest::Approx(1.0));
  CHECK(map.freq(1, 1) == 0.0);
  CHECK(map.max_freq(1) == doctest::Approx(1.0));
  CHECK(map.max_freq(7) == doctest::Approx(1.0));
  CHECK(map.max_freq(0) == 0.0);
}

TEST_CASE("single rep yields frequencies in {0,1}") {
  const auto selector = [](const std::vector<int>& rows, std::uint64_t) {
    // Selection depends on the subsample, exercising the rep seed path.
    return std::vector<std::vector<int>>{{rows[0] % 6}};
  };
  const FrequencyMap map = run_stability_custom(12, 6, stub_config(1, 1, 77), selector);
  for (int j = 0; j < 6; ++j) {
    CHECK((map.freq(0, j) == 0.0 || map.freq(0, j) == 1.0));
  }
}

TEST_CASE("subsample size is ceil(n/2), rows sorted and distinct") {
  std::vector<int> seen_sizes;
  const auto selector = [&](const std::vector<int>& rows, std::uint64_t) {
    seen_sizes.push_back(static_cast<int>(rows.size()));
    CHECK(std::is_sorted(rows.begin(), rows.end()));
    CHECK(std::adjacent_find(rows.begin(), rows.end()) == rows.end());
    return std::vector<std::vector<int>>{{0}};
  };
  run_stability_custom(17, 4, stub_config(1, 8, 3), selector);
  for (int s : seen_sizes) CHECK(s == 9);  // ceil(17/2)
}

TEST_CASE("identical master seed gives identical maps regardless of threads") {
  Dataset1D data = case1_data(60, 48, 101);
  StabilityConfig cfg;
  cfg.grid = {{{0.02}, 0.01}, {{0.05}, 0.01}};
  cfg.reps = 12;
  cfg.master_seed = 424242;
  cfg.fitter = Fitter::kPwc;
  cfg.min_seg = 5;
  cfg.threads = 1;
  const FrequencyMap a = run_stability(data, cfg);
  cfg.threads = 4;
  const FrequencyMap b = run_stability(data, cfg);
  CHECK(a.counts == b.counts);

  cfg.master_seed = 424243;
  const FrequencyMap c = run_stability(data, cfg);
  CHECK(a.counts != c.counts);
}

TEST_CASE("frequencies are invariant to the ordering of B") {
  Dataset1D data = case1_data(50, 40, 103);
  StabilityConfig cfg;
  cfg.grid = {{{0.02}, 0.01}, {{0.06}, 0.01}};
  cfg.reps = 8;
  cfg.master_seed = 7;
  cfg.fitter = Fitter::kPwc;
  const FrequencyMap ab = run_stability(data, cfg);
  std::swap(cfg.grid[0], cfg.grid[1]);
  const FrequencyMap ba = run_stability(data, cfg);
  CHECK(ab.counts.row(0) == ba.counts.row(1));
  CHECK(ab.counts.row(1) == ba.counts.row(0));
}

TEST_CASE("count conservation: total counts equal total selected sizes") {
  std::vector<int> sizes;
  Rng gen(5);
  const auto selector = [&](const std::vector<int>&, std::uint64_t rep_seed) {
    Rng rng(rep_seed);
    std::vector<std::vector<int>> out(2);
    for (auto& pts : out) {
      const int k = 1 + static_cast<int>(rng.below(5));
      pts = rng.sample_without_replacement(10, k);
      sizes.push_back(k);
    }
    return out;
  };
  const FrequencyMap map = run_stability_custom(30, 10, stub_config(2, 20, 11), selector);
  CHECK(map.counts.sum() == std::accumulate(sizes.begin(), sizes.end(), 0));
}

TEST_CASE("stable_subdomain: cutoffs, nesting, edge cases") {
  FrequencyMap map;
  map.grid = {{{0.01}, 0.01}};
  map.reps = 10;
  map.counts.resize(1, 5);
  map.counts << 0, 2, 5, 8, 9;
  map.finalize();

  // pi at or above the maximum frequency selects nothing (strict cutoff).
  CHECK(stable_subdomain(map, 0.95).points.empty());
  CHECK(stable_subdomain(map, 0.9).points.empty());
  CHECK(stable_subdomain(map, 0.0).points == std::vector<int>{1, 2, 3, 4});

  // Strict inequality: points at exactly the cutoff are excluded.
  CHECK(stable_subdomain(map, 0.5).points == std::vector<int>{3, 4});

  // Monotone nesting over a pi ladder.
  std::vector<int> prev = stable_subdomain(map, 0.05).points;
  for (double pi : {0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95}) {
    const std::vector<int> cur = stable_subdomain(map, pi).points;
    CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
    prev = cur;
  }

  CHECK_THROWS_AS(stable_subdomain(map, 1.0), ConfigError);
  CHECK_THROWS_AS(stable_subdomain(map, -0.1), ConfigError);
}

TEST_CASE("run_stability on case-1 style data concentrates on the signal") {
  // Small but real end-to-end run: the true support should out-rank the
  // typical null point by selection frequency.
  Dataset1D data = case1_data(300, 128, 107);
  StabilityConfig cfg;
  cfg.grid = {{{0.02}, 0.01}, {{0.035}, 0.01}};
  cfg.reps = 20;
  cfg.master_seed = 2029;
  cfg.fitter = Fitter::kPwc;
  cfg.threads = 2;
  const FrequencyMap map = run_stability(data, cfg);

  const auto truth = beta_1d_support(128);
  double truth_mean = 0.0;
  for (int j : truth) truth_mean += map.max_freq(j);
  truth_mean /= truth.size();

  double null_mean = 0.0;
  int null_count = 0;
  for (int j = 0; j < 128; ++j) {
    if (std::find(truth.begin(), truth.end(), j) == truth.end()) {
      null_mean += map.max_freq(j);
      ++null_count;
    }
  }
  null_mean /= null_count;
  CHECK(truth_mean > null_mean + 0.2);
}

TEST_CASE("run_stability rejects degenerate configs") {
  Dataset1D data = case1_data(30, 32, 109);
  StabilityConfig cfg;
  cfg.reps = 10;
  CHECK_THROWS_AS(run_stability(data, cfg), ConfigError);  // empty grid
  cfg.grid = {{{0.02}, 0.01}};
  cfg.reps = 0;
  CHECK_THROWS_AS(run_stability(data, cfg), ConfigError);
  cfg.reps = 5;
  cfg.grid = {{{0.02, 0.03}, 0.01}};  // wrong rho arity for 1D
  CHECK_THROWS_AS(run_stability(data, cfg), ConfigError);
}

TEST_CASE("default tuning grids match the documented values") {
  const auto smooth = StabilityConfig::default_grid_1d_smooth();
  REQUIRE(smooth.size() == 5);
  CHECK(smooth[0].rho[0] == doctest::Approx(0.02));
  CHECK(smooth[4].rho[0] == doctest::Approx(0.06));
  const auto rough = StabilityConfig::default_grid_1d_rough();
  CHECK(rough[0].rho[0] == doctest::Approx(0.0));
  CHECK(rough[4].rho[0] == doctest::Approx(0.08));
  const auto grid3d = StabilityConfig::default_grid_3d();
  CHECK(grid3d.size() == 8);
  for (const auto& tp : grid3d) {
    CHECK(tp.rho.size() == 3);
    CHECK(tp.c == doctest::Approx(0.01));
  }
}
