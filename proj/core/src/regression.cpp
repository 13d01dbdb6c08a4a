#include "fudos/regression.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <string>

namespace fudos {

SegmentFeatures features(const Eigen::MatrixXd& X, double ip_scale, const Segments& segments,
                         const std::vector<int>& subset) {
  if (subset.empty()) throw ConfigError("features: empty segment subset");
  SegmentFeatures out;
  out.subset = subset;
  out.F.resize(X.rows(), static_cast<int>(subset.size()));
  out.segment_sizes.reserve(subset.size());
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const int s = subset[k];
    if (s < 0 || s >= static_cast<int>(segments.size())) {
      throw ConfigError("features: segment index " + std::to_string(s) + " out of range");
    }
    const auto& pts = segments[s].points;
    out.segment_sizes.push_back(static_cast<int>(pts.size()));
    Eigen::VectorXd col = Eigen::VectorXd::Zero(X.rows());
    for (int j : pts) col += X.col(j);
    out.F.col(static_cast<int>(k)) = col * ip_scale;
  }
  return out;
}

SegmentFeatures features(const Dataset1D& data, const Segments& segments,
                         const std::vector<int>& subset) {
  return features(data.X, 1.0 / data.p(), segments, subset);
}

SegmentFeatures features(const Dataset3D& data, const Segments& segments,
                         const std::vector<int>& subset) {
  return features(data.X, 1.0 / data.dims.voxels(), segments, subset);
}

PwcModel fit_pwc(const SegmentFeatures& feats, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(y.size());
  if (n == 0) throw ConfigError("fit_pwc: empty response");
  const int k = static_cast<int>(feats.F.cols());
  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = feats.F;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  const Eigen::VectorXd sol = svd.solve(y);

  PwcModel model;
  model.intercept = sol(0);
  model.coefs = sol.tail(k);
  model.subset = feats.subset;
  return model;
}

Eigen::VectorXd predict(const PwcModel& model, const SegmentFeatures& feats) {
  if (feats.F.cols() != model.coefs.size()) {
    throw ConfigError("predict: feature count differs from coefficient count");
  }
  return (feats.F * model.coefs).array() + model.intercept + model.y_center;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid(30);
  for (int i = 0; i < 30; ++i) {
    grid[i] = std::pow(10.0, -6.0 + 10.0 * i / 29.0);
  }
  return grid;
}

SplineDesign build_spline_design(const Eigen::MatrixXd& X, const Grid1D& grid,
                                 const Segments& segments) {
  SplineDesign out;
  const double ip_scale = 1.0 / grid.size();
  for (const auto& seg : segments) {
    PsplineModel::SegmentFit meta;
    meta.points = seg.points;
    const int len = static_cast<int>(seg.points.size());
    if (len == 0) throw ConfigError("spline design: empty segment");
    meta.lo = grid.points[seg.points.front()];
    meta.hi = grid.points[seg.points.back()];
    if (len < 4 || !(meta.hi > meta.lo)) {
      // Too short for a cubic basis: constant coefficient on the segment.
      meta.constant_fallback = true;
      meta.n_interior = 0;
      Eigen::VectorXd col = Eigen::VectorXd::Zero(X.rows());
      for (int j : seg.points) col += X.col(j);
      out.blocks.push_back(col * ip_scale);
      out.penalties.push_back(Eigen::MatrixXd::Zero(1, 1));
      out.meta.push_back(std::move(meta));
      continue;
    }
    meta.n_interior = len / 4;
    BsplineBasis basis(meta.lo, meta.hi, meta.n_interior);
    const int b = basis.size();
    Eigen::MatrixXd phi(len, b);  // basis at member points, Riemann-scaled
    for (int r = 0; r < len; ++r) {
      phi.row(r) = basis.eval(grid.points[seg.points[r]]).transpose() * ip_scale;
    }
    Eigen::MatrixXd block(X.rows(), b);
    Eigen::MatrixXd Xseg(X.rows(), len);
    for (int r = 0; r < len; ++r) Xseg.col(r) = X.col(seg.points[r]);
    block.noalias() = Xseg * phi;
    out.blocks.push_back(std::move(block));
    out.penalties.push_back(basis.penalty());
    out.meta.push_back(std::move(meta));
  }
  return out;
}

RidgePath::RidgePath(const Eigen::MatrixXd& A, const Eigen::MatrixXd& P,
                     const Eigen::VectorXd& b, double yty, int n_rows)
    : yty_(yty), n_(n_rows) {
  const int m = static_cast<int>(A.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    // Rank-deficient design: nudge the diagonal enough to factor.
    const double jitter = 1e-10 * std::max(A.trace() / m, 1.0);
    Eigen::MatrixXd Aj = A;
    Aj.diagonal().array() += jitter;
    llt.compute(Aj);
    if (llt.info() != Eigen::Success) {
      throw NumericError("ridge path: design Gram is not factorizable");
    }
  }
  const Eigen::MatrixXd R = llt.matrixU();
  auto solve_rt = [&](const Eigen::MatrixXd& rhs) -> Eigen::MatrixXd {
    return R.transpose().triangularView<Eigen::Lower>().solve(rhs);
  };
  Eigen::MatrixXd M = solve_rt(P);
  M = solve_rt(M.transpose());  // R^-T P R^-1, symmetric
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  d_ = eig.eigenvalues().cwiseMax(0.0);
  // Rounding leaves the penalty null space with eigenvalues ~1e-11*|M|;
  // snap them to zero so huge lambdas cannot shrink null-space components.
  const double cap = d_.maxCoeff();
  for (int i = 0; i < d_.size(); ++i) {
    if (d_(i) < 1e-10 * cap) d_(i) = 0.0;
  }
  const Eigen::MatrixXd& U = eig.eigenvectors();
  w_ = U.transpose() * solve_rt(b);
  r_inv_u_ = R.triangularView<Eigen::Upper>().solve(U);
}

double RidgePath::edf(double lambda) const {
  return (1.0 / (1.0 + lambda * d_.array())).sum();
}

double RidgePath::rss(double lambda) const {
  const auto s = 1.0 / (1.0 + lambda * d_.array());
  const double v = yty_ - 2.0 * (w_.array().square() * s).sum() +
                   (w_.array().square() * s.square()).sum();
  return std::max(v, 0.0);
}

double RidgePath::gcv(double lambda) const {
  const double tr = edf(lambda);
  if (tr >= n_) return std::numeric_limits<double>::infinity();
  const double denom = static_cast<double>(n_) - tr;
  return n_ * rss(lambda) / (denom * denom);
}

Eigen::VectorXd RidgePath::coefs(double lambda) const {
  const Eigen::VectorXd scaled = w_.array() / (1.0 + lambda * d_.array());
  return r_inv_u_ * scaled;
}

namespace {

/// Index bookkeeping for the stacked design [intercept | block_0 | ...].
struct ColumnMap {
  std::vector<int> offsets;  // per selected segment, first column
  int total = 1;             // including the intercept column 0
};

ColumnMap map_columns(const SplineDesign& design, const std::vector<int>& subset) {
  ColumnMap map;
  for (int s : subset) {
    map.offsets.push_back(map.total);
    map.total += static_cast<int>(design.blocks[s].cols());
  }
  return map;
}

Eigen::MatrixXd stack_design(const SplineDesign& design, const std::vector<int>& subset,
                             const ColumnMap& map) {
  const int n = static_cast<int>(design.blocks.empty() ? 0 : design.blocks[0].rows());
  Eigen::MatrixXd N(n, map.total);
  N.col(0).setOnes();
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const auto& blk = design.blocks[subset[k]];
    N.middleCols(map.offsets[k], blk.cols()) = blk;
  }
  return N;
}

Eigen::MatrixXd stack_penalty(const SplineDesign& design, const std::vector<int>& subset,
                              const ColumnMap& map) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(map.total, map.total);
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const auto& blk = design.penalties[subset[k]];
    P.block(map.offsets[k], map.offsets[k], blk.rows(), blk.cols()) = blk;
  }
  return P;
}

}  // namespace

PsplineModel fit_pspline(const Dataset1D& data, const Segments& segments,
                         const std::vector<int>& subset, std::span<const double> lambda_grid) {
  if (subset.empty()) throw ConfigError("fit_pspline: empty segment subset");
  std::vector<double> default_grid;
  if (lambda_grid.empty()) {
    default_grid = default_lambda_grid();
    lambda_grid = default_grid;
  }

  Segments selected;
  for (int s : subset) selected.push_back(segments[s]);
  SplineDesign design = build_spline_design(data.X, data.grid, selected);

  std::vector<int> all(selected.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  const ColumnMap map = map_columns(design, all);
  const Eigen::MatrixXd N = stack_design(design, all, map);
  const Eigen::MatrixXd P = stack_penalty(design, all, map);

  const Eigen::MatrixXd A = N.transpose() * N;
  const Eigen::VectorXd b = N.transpose() * data.Y;
  RidgePath path(A, P, b, data.Y.squaredNorm(), data.n());

  PsplineModel model;
  model.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
  double best_gcv = std::numeric_limits<double>::infinity();
  for (double lam : lambda_grid) {
    const double g = path.gcv(lam);
    model.gcv_path.push_back(g);
    if (g < best_gcv) {
      best_gcv = g;
      model.lambda = lam;
    }
  }
  if (!std::isfinite(best_gcv)) {
    throw NumericError("fit_pspline: GCV is infinite across the whole lambda grid");
  }

  const Eigen::VectorXd coef = path.coefs(model.lambda);
  model.intercept = coef(0);
  for (std::size_t k = 0; k < design.meta.size(); ++k) {
    PsplineModel::SegmentFit fit = design.meta[k];
    fit.coefs = coef.segment(map.offsets[k], design.blocks[k].cols());
    model.segments.push_back(std::move(fit));
  }
  model.subset = subset;
  model.x_center = data.col_means;
  model.y_center = data.centered ? data.y_mean : 0.0;
  return model;
}

Eigen::VectorXd predict(const PsplineModel& model, const Dataset1D& data) {
  const int n = data.n();
  Eigen::MatrixXd X = data.X;
  if (!data.centered) {
    if (model.x_center.size() != X.cols()) {
      throw ConfigError("predict: model centering means do not match dataset width");
    }
    X.rowwise() -= model.x_center.transpose();
  }
  const double ip_scale = 1.0 / data.p();
  Eigen::VectorXd pred = Eigen::VectorXd::Constant(n, model.intercept + model.y_center);
  for (const auto& seg : model.segments) {
    if (seg.constant_fallback) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
      for (int j : seg.points) col += X.col(j);
      pred += seg.coefs(0) * ip_scale * col;
      continue;
    }
    BsplineBasis basis(seg.lo, seg.hi, seg.n_interior);
    for (int j : seg.points) {
      const double bval = basis.eval(data.grid.points[j]).dot(seg.coefs);
      pred += X.col(j) * (bval * ip_scale);
    }
  }
  return pred;
}

Eigen::VectorXd beta_curve(const PsplineModel& model, const Grid1D& grid) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(grid.size());
  for (const auto& seg : model.segments) {
    if (seg.constant_fallback) {
      for (int j : seg.points) beta(j) = seg.coefs(0);
      continue;
    }
    BsplineBasis basis(seg.lo, seg.hi, seg.n_interior);
    for (int j : seg.points) beta(j) = basis.eval(grid.points[j]).dot(seg.coefs);
  }
  return beta;
}

}  // namespace fudos
