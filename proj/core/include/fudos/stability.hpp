#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "fudos/dataset.hpp"
#include "fudos/selection.hpp"

namespace fudos {

/// One tuning pair: the segmentation penalty (scalar in 1D, one value per
/// axis in 3D) and the selection stopping threshold c.
struct TuningPair {
  std::vector<double> rho;  // size 1 or 3
  double c = 0.01;
};

struct StabilityConfig {
  std::vector<TuningPair> grid;  // B
  int reps = 100;
  std::uint64_t master_seed = 0;
  int folds = 5;
  Fitter fitter = Fitter::kPwc;
  int q = 0;  // 0 = rule of thumb (p/2 in 1D, L/2 in 3D)
  int min_seg = 5;
  std::array<int, 3> min_seg_3d{3, 3, 3};
  int max_l = 0;
  std::vector<double> lambda_grid;
  int threads = 0;

  /// The tuning grids used by the reference experiments.
  static std::vector<TuningPair> default_grid_1d_smooth();  // rho in {.02,.035,.04,.05,.06}
  static std::vector<TuningPair> default_grid_1d_rough();   // rho in {0,.03,.04,.06,.08}
  static std::vector<TuningPair> default_grid_3d();         // rho triples over {.01,.03}^3
};

/// Per-grid-point selection frequencies per tuning pair, plus the pointwise
/// maximum over the grid B.
struct FrequencyMap {
  std::vector<TuningPair> grid;
  int reps = 0;
  Eigen::MatrixXi counts;    // |B| x points
  Eigen::MatrixXd freq;      // counts / reps
  Eigen::VectorXd max_freq;  // per point

  int points() const { return static_cast<int>(counts.cols()); }
  void finalize();  // fills freq and max_freq from counts
};

struct StableSubdomain {
  double pi = 0.0;
  std::vector<int> points;  // indices with max_freq > pi, ascending
};

/// Subsamples ceil(n/2) rows without replacement `reps` times (seeds derived
/// from master_seed and the rep index), runs segmentation + subset selection
/// per tuning pair, and counts how often each grid point lands in the
/// selected subdomain.
FrequencyMap run_stability(const Dataset1D& data, const StabilityConfig& config);
FrequencyMap run_stability(const Dataset3D& data, const StabilityConfig& config);

/// Test seam: the selector receives the subsampled row indices and the rep
/// seed, and returns the selected point set per tuning pair.
using SubdomainSelector =
    std::function<std::vector<std::vector<int>>(const std::vector<int>& rows,
                                                std::uint64_t rep_seed)>;
FrequencyMap run_stability_custom(int n, int points, const StabilityConfig& config,
                                  const SubdomainSelector& selector);

StableSubdomain stable_subdomain(const FrequencyMap& map, double pi);

}  // namespace fudos
