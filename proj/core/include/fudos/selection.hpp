#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fudos/dataset.hpp"
#include "fudos/regression.hpp"
#include "fudos/segmentation.hpp"

namespace fudos {

enum class Fitter { kPwc, kPspline };

/// Balanced random k-fold assignment (fold sizes differ by at most one).
struct FoldSplit {
  std::vector<int> assignment;  // fold id per sample
  int folds = 0;

  static FoldSplit random(int n, int folds, std::uint64_t seed);
  void validate(int n) const;
};

struct SelectionConfig {
  double c = 0.01;   // relative-improvement stopping threshold
  int q = 1;         // truncation budget; top ceil(sqrt(q)) subsets survive
  int folds = 5;
  Fitter fitter = Fitter::kPwc;
  std::uint64_t seed = 0;
  std::vector<double> lambda_grid;  // pspline only; empty = default grid

  /// Rule-of-thumb budgets: q = p/2 for 1D grids, q = L/2 for 3D segment sets.
  static SelectionConfig defaults_1d(int p);
  static SelectionConfig defaults_3d(int n_segments);
};

enum class StopReason { kCvRatio, kNoCandidates, kStepCap, kExactFit };

struct SelectionTrace {
  struct Candidate {
    std::vector<int> subset;
    double cv = 0.0;
  };
  struct Step {
    std::vector<Candidate> ranked;  // ascending CV
  };
  std::vector<Step> steps;
  std::vector<double> cv_star_path;  // minimum CV per step
  std::vector<int> selected;
  int termination_step = 0;  // K, 1-based
  StopReason reason = StopReason::kCvRatio;
};

/// Precomputes everything subset evaluation needs (features or spline
/// design, per-fold Grams) so candidate CV errors are cheap and safe to
/// compute concurrently. `grid` may be null for the pwc fitter.
class CvEngine {
 public:
  CvEngine(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, double ip_scale,
           const Grid1D* grid, const Segments& segments, const FoldSplit& split, Fitter fitter,
           std::span<const double> lambda_grid = {});
  ~CvEngine();
  CvEngine(CvEngine&&) noexcept;

  /// 5-fold (or k-fold) mean squared prediction error of the subset.
  double error(const std::vector<int>& subset) const;

  int segment_count() const;
  /// Sample variance of Y; scales the numeric floor for the stopping rule.
  double response_scale() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Cross-validated prediction error of one subset (Eq.-style mean over
/// folds of per-fold mean squared errors). The fold split is an explicit
/// argument so callers control the randomness.
double cv_error(const Dataset1D& data, const Segments& segments, const std::vector<int>& subset,
                const FoldSplit& split, Fitter fitter, std::span<const double> lambda_grid = {});
double cv_error(const Dataset3D& data, const Segments& segments, const std::vector<int>& subset,
                const FoldSplit& split, Fitter fitter, std::span<const double> lambda_grid = {});

/// Greedy CV-ranked subset search: evaluates all singletons, then unions of
/// pairs among the top ceil(sqrt(q)) subsets of the previous step, stopping
/// on the relative-improvement rule, candidate exhaustion, or the step cap.
SelectionTrace select_subset(const Dataset1D& data, const Segments& segments,
                             const SelectionConfig& config);
SelectionTrace select_subset(const Dataset3D& data, const Segments& segments,
                             const SelectionConfig& config);
SelectionTrace select_subset(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, double ip_scale,
                             const Grid1D* grid, const Segments& segments,
                             const SelectionConfig& config);

}  // namespace fudos
