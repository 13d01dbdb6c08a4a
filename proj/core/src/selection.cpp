#include "fudos/selection.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "fudos/rng.hpp"

namespace fudos {

FoldSplit FoldSplit::random(int n, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("fold split needs at least 2 folds");
  if (n < 2 * folds) {
    throw ConfigError("fold split: a fold would hold fewer than 2 samples (n=" +
                      std::to_string(n) + ", folds=" + std::to_string(folds) + ")");
  }
  // Shuffle indices, deal them round-robin: balanced within one sample.
  Rng rng(seed);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[i], order[j]);
  }
  FoldSplit split;
  split.folds = folds;
  split.assignment.resize(n);
  for (int i = 0; i < n; ++i) split.assignment[order[i]] = i % folds;
  return split;
}

void FoldSplit::validate(int n) const {
  if (static_cast<int>(assignment.size()) != n) {
    throw ConfigError("fold assignment length differs from sample count");
  }
  std::vector<int> sizes(folds, 0);
  for (int f : assignment) {
    if (f < 0 || f >= folds) throw ConfigError("fold id out of range");
    ++sizes[f];
  }
  for (int s : sizes) {
    if (s < 2) throw ConfigError("a fold holds fewer than 2 samples");
  }
}

SelectionConfig SelectionConfig::defaults_1d(int p) {
  SelectionConfig cfg;
  cfg.q = std::max(1, p / 2);
  cfg.fitter = Fitter::kPspline;
  return cfg;
}

SelectionConfig SelectionConfig::defaults_3d(int n_segments) {
  SelectionConfig cfg;
  cfg.q = std::max(1, n_segments / 2);
  cfg.fitter = Fitter::kPwc;
  return cfg;
}

// ---------------------------------------------------------------------------
// CvEngine

struct CvEngine::Impl {
  Fitter fitter;
  int n = 0;
  int n_segments = 0;
  double y_var = 0.0;
  FoldSplit split;
  Eigen::VectorXd Y;

  // pwc: cached features; per candidate we solve the small LS directly.
  Eigen::MatrixXd F;  // n x L

  // pspline: stacked design with intercept at column 0 plus cached per-fold
  // train Grams, so each candidate is a submatrix extraction.
  Eigen::MatrixXd N;                       // n x total_cols
  Eigen::MatrixXd penalty;                 // total_cols x total_cols
  std::vector<int> col_offset;             // per segment
  std::vector<int> col_count;              // per segment
  std::vector<std::vector<int>> fold_rows;  // test rows per fold
  std::vector<std::vector<int>> train_rows;
  std::vector<Eigen::MatrixXd> fold_gram;   // train N^T N per fold
  std::vector<Eigen::VectorXd> fold_nty;    // train N^T Y per fold
  std::vector<double> fold_yty;             // train Y^T Y per fold
  std::vector<double> lambda_grid;

  double error_pwc(const std::vector<int>& subset) const;
  double error_pspline(const std::vector<int>& subset) const;
};

CvEngine::CvEngine(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, double ip_scale,
                   const Grid1D* grid, const Segments& segments, const FoldSplit& split,
                   Fitter fitter, std::span<const double> lambda_grid)
    : impl_(std::make_unique<Impl>()) {
  impl_->fitter = fitter;
  impl_->n = static_cast<int>(X.rows());
  impl_->n_segments = static_cast<int>(segments.size());
  impl_->split = split;
  impl_->split.validate(impl_->n);
  impl_->Y = Y;
  const double mean = Y.mean();
  impl_->y_var = (Y.array() - mean).square().sum() / std::max(1, impl_->n - 1);

  impl_->fold_rows.resize(split.folds);
  impl_->train_rows.resize(split.folds);
  for (int i = 0; i < impl_->n; ++i) {
    for (int f = 0; f < split.folds; ++f) {
      (split.assignment[i] == f ? impl_->fold_rows : impl_->train_rows)[f].push_back(i);
    }
  }

  if (fitter == Fitter::kPwc) {
    std::vector<int> all(segments.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    impl_->F = features(X, ip_scale, segments, all).F;
    return;
  }

  if (grid == nullptr) throw ConfigError("pspline fitter needs a 1D grid");
  impl_->lambda_grid = lambda_grid.empty() ? default_lambda_grid()
                                           : std::vector<double>(lambda_grid.begin(),
                                                                 lambda_grid.end());
  SplineDesign design = build_spline_design(X, *grid, segments);
  int total = 1;
  for (const auto& blk : design.blocks) {
    impl_->col_offset.push_back(total);
    impl_->col_count.push_back(static_cast<int>(blk.cols()));
    total += static_cast<int>(blk.cols());
  }
  impl_->N.resize(impl_->n, total);
  impl_->N.col(0).setOnes();
  impl_->penalty = Eigen::MatrixXd::Zero(total, total);
  for (std::size_t s = 0; s < design.blocks.size(); ++s) {
    impl_->N.middleCols(impl_->col_offset[s], impl_->col_count[s]) = design.blocks[s];
    impl_->penalty.block(impl_->col_offset[s], impl_->col_offset[s], impl_->col_count[s],
                         impl_->col_count[s]) = design.penalties[s];
  }
  for (int f = 0; f < split.folds; ++f) {
    const auto& rows = impl_->train_rows[f];
    Eigen::MatrixXd Ntr(rows.size(), total);
    Eigen::VectorXd Ytr(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      Ntr.row(static_cast<int>(r)) = impl_->N.row(rows[r]);
      Ytr(static_cast<int>(r)) = Y(rows[r]);
    }
    impl_->fold_gram.push_back(Ntr.transpose() * Ntr);
    impl_->fold_nty.push_back(Ntr.transpose() * Ytr);
    impl_->fold_yty.push_back(Ytr.squaredNorm());
  }
}

CvEngine::~CvEngine() = default;
CvEngine::CvEngine(CvEngine&&) noexcept = default;

int CvEngine::segment_count() const { return impl_->n_segments; }
double CvEngine::response_scale() const { return impl_->y_var; }

double CvEngine::Impl::error_pwc(const std::vector<int>& subset) const {
  const int k = static_cast<int>(subset.size());
  double total = 0.0;
  for (int f = 0; f < split.folds; ++f) {
    const auto& tr = train_rows[f];
    const auto& te = fold_rows[f];
    Eigen::MatrixXd design(tr.size(), k + 1);
    Eigen::VectorXd y(tr.size());
    for (std::size_t r = 0; r < tr.size(); ++r) {
      design(static_cast<int>(r), 0) = 1.0;
      for (int j = 0; j < k; ++j) design(static_cast<int>(r), j + 1) = F(tr[r], subset[j]);
      y(static_cast<int>(r)) = Y(tr[r]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Eigen::VectorXd sol = svd.solve(y);
    double sse = 0.0;
    for (int i : te) {
      double pred = sol(0);
      for (int j = 0; j < k; ++j) pred += F(i, subset[j]) * sol(j + 1);
      const double r = Y(i) - pred;
      sse += r * r;
    }
    total += sse / static_cast<double>(te.size());
  }
  return total / split.folds;
}

double CvEngine::Impl::error_pspline(const std::vector<int>& subset) const {
  // Column list: intercept plus the subset's blocks.
  std::vector<int> cols;
  cols.push_back(0);
  for (int s : subset) {
    for (int j = 0; j < col_count[s]; ++j) cols.push_back(col_offset[s] + j);
  }
  const int b = static_cast<int>(cols.size());

  double total = 0.0;
  Eigen::MatrixXd A(b, b), P(b, b);
  Eigen::VectorXd rhs(b);
  for (int f = 0; f < split.folds; ++f) {
    for (int i = 0; i < b; ++i) {
      rhs(i) = fold_nty[f](cols[i]);
      for (int j = 0; j < b; ++j) {
        A(i, j) = fold_gram[f](cols[i], cols[j]);
        P(i, j) = penalty(cols[i], cols[j]);
      }
    }
    RidgePath path(A, P, rhs, fold_yty[f], static_cast<int>(train_rows[f].size()));
    double best_gcv = std::numeric_limits<double>::infinity();
    double best_lambda = lambda_grid.front();
    for (double lam : lambda_grid) {
      const double g = path.gcv(lam);
      if (g < best_gcv) {
        best_gcv = g;
        best_lambda = lam;
      }
    }
    const Eigen::VectorXd coef = path.coefs(best_lambda);
    double sse = 0.0;
    for (int i : fold_rows[f]) {
      double pred = 0.0;
      for (int j = 0; j < b; ++j) pred += N(i, cols[j]) * coef(j);
      const double r = Y(i) - pred;
      sse += r * r;
    }
    total += sse / static_cast<double>(fold_rows[f].size());
  }
  return total / split.folds;
}

double CvEngine::error(const std::vector<int>& subset) const {
  if (subset.empty()) throw ConfigError("cv error: empty subset");
  for (int s : subset) {
    if (s < 0 || s >= impl_->n_segments) {
      throw ConfigError("cv error: segment index " + std::to_string(s) + " out of range");
    }
  }
  return impl_->fitter == Fitter::kPwc ? impl_->error_pwc(subset) : impl_->error_pspline(subset);
}

double cv_error(const Dataset1D& data, const Segments& segments, const std::vector<int>& subset,
                const FoldSplit& split, Fitter fitter, std::span<const double> lambda_grid) {
  CvEngine engine(data.X, data.Y, 1.0 / data.p(), &data.grid, segments, split, fitter,
                  lambda_grid);
  return engine.error(subset);
}

double cv_error(const Dataset3D& data, const Segments& segments, const std::vector<int>& subset,
                const FoldSplit& split, Fitter fitter, std::span<const double> lambda_grid) {
  CvEngine engine(data.X, data.Y, 1.0 / data.dims.voxels(), nullptr, segments, split, fitter,
                  lambda_grid);
  return engine.error(subset);
}

// ---------------------------------------------------------------------------
// Greedy subset search

namespace {

/// CV values this far below the response variance are numerically exact
/// fits; treating them as zero keeps the stopping rule at its exact
/// arithmetic behavior instead of chasing rounding noise.
constexpr double kExactFitRel = 1e-20;

std::vector<SelectionTrace::Candidate> rank_candidates(
    std::vector<SelectionTrace::Candidate> cands) {
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
    if (a.cv != b.cv) return a.cv < b.cv;
    return a.subset < b.subset;  // deterministic tie order
  });
  return cands;
}

}  // namespace

SelectionTrace select_subset(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, double ip_scale,
                             const Grid1D* grid, const Segments& segments,
                             const SelectionConfig& config) {
  const int L = static_cast<int>(segments.size());
  if (L == 0) throw ConfigError("select_subset: no segments");
  if (!(config.c > 0.0) || !(config.c < 1.0)) {
    throw ConfigError("selection threshold c must lie in (0,1)");
  }
  if (config.q < 1) throw ConfigError("selection budget q must be >= 1");

  const FoldSplit split =
      FoldSplit::random(static_cast<int>(X.rows()), config.folds, config.seed);
  const CvEngine engine(X, Y, ip_scale, grid, segments, split, config.fitter,
                        config.lambda_grid);
  const double floor = kExactFitRel * std::max(engine.response_scale(), 1e-300);
  const auto effective = [floor](double cv) { return cv <= floor ? 0.0 : cv; };

  const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(config.q))));

  SelectionTrace trace;
  std::set<std::vector<int>> evaluated;

  // Step 1: all singletons.
  {
    SelectionTrace::Step step;
    for (int s = 0; s < L; ++s) {
      SelectionTrace::Candidate cand;
      cand.subset = {s};
      cand.cv = engine.error(cand.subset);
      evaluated.insert(cand.subset);
      step.ranked.push_back(std::move(cand));
    }
    step.ranked = rank_candidates(std::move(step.ranked));
    trace.cv_star_path.push_back(step.ranked.front().cv);
    trace.steps.push_back(std::move(step));
  }

  for (int k = 2; k <= L; ++k) {
    const auto& prev = trace.steps.back().ranked;
    const double cv_prev = trace.cv_star_path.back();

    if (effective(cv_prev) == 0.0) {
      // Numerically exact fit: no further step can satisfy the improvement
      // rule, so the current best is final.
      trace.reason = StopReason::kExactFit;
      break;
    }

    const int top = std::min<int>(m, static_cast<int>(prev.size()));
    std::set<std::vector<int>> fresh;
    for (int i = 0; i < top; ++i) {
      for (int j = i + 1; j < top; ++j) {
        std::vector<int> u;
        std::set_union(prev[i].subset.begin(), prev[i].subset.end(), prev[j].subset.begin(),
                       prev[j].subset.end(), std::back_inserter(u));
        if (u == prev[i].subset || u == prev[j].subset) continue;  // nested pair
        if (evaluated.count(u)) continue;
        fresh.insert(std::move(u));
      }
    }
    if (fresh.empty()) {
      trace.reason = StopReason::kNoCandidates;
      break;
    }

    SelectionTrace::Step step;
    for (const auto& subset : fresh) {
      SelectionTrace::Candidate cand;
      cand.subset = subset;
      cand.cv = engine.error(subset);
      evaluated.insert(subset);
      step.ranked.push_back(std::move(cand));
    }
    step.ranked = rank_candidates(std::move(step.ranked));
    const double cv_new = step.ranked.front().cv;
    trace.cv_star_path.push_back(cv_new);
    trace.steps.push_back(std::move(step));

    // Termination rule between step k-1 and k, in multiplicative form so a
    // zero previous CV stops cleanly. The triggering step stays in the trace
    // so the decision is re-checkable from the recorded path.
    if (effective(cv_prev) - effective(cv_new) <= config.c * effective(cv_prev)) {
      trace.reason = StopReason::kCvRatio;
      trace.termination_step = k - 1;
      break;
    }
    if (k == L) {
      trace.reason = StopReason::kStepCap;
      break;
    }
  }

  if (trace.termination_step == 0) trace.termination_step = static_cast<int>(trace.steps.size());
  trace.selected = trace.steps[trace.termination_step - 1].ranked.front().subset;
  return trace;
}

SelectionTrace select_subset(const Dataset1D& data, const Segments& segments,
                             const SelectionConfig& config) {
  return select_subset(data.X, data.Y, 1.0 / data.p(), &data.grid, segments, config);
}

SelectionTrace select_subset(const Dataset3D& data, const Segments& segments,
                             const SelectionConfig& config) {
  return select_subset(data.X, data.Y, 1.0 / data.dims.voxels(), nullptr, segments, config);
}

}  // namespace fudos
