#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "fudos/bspline.hpp"
#include "fudos/dataset.hpp"
#include "fudos/segmentation.hpp"

namespace fudos {

/// Segment-integral features: F(i,k) = ip_scale * sum of X_i over the
/// points of the k-th selected segment. ip_scale is 1/p in 1D and
/// 1/(H*V*Z) in 3D, the Riemann weight of one point.
struct SegmentFeatures {
  Eigen::MatrixXd F;
  std::vector<int> segment_sizes;
  std::vector<int> subset;  // segment indices the columns correspond to
};

SegmentFeatures features(const Eigen::MatrixXd& X, double ip_scale, const Segments& segments,
                         const std::vector<int>& subset);
SegmentFeatures features(const Dataset1D& data, const Segments& segments,
                         const std::vector<int>& subset);
SegmentFeatures features(const Dataset3D& data, const Segments& segments,
                         const std::vector<int>& subset);

/// Piecewise-constant model: one coefficient per selected segment plus an
/// intercept. Rank-deficient designs get the minimum-norm solution
/// (singular values below 1e-10 relative are dropped).
struct PwcModel {
  double intercept = 0.0;
  Eigen::VectorXd coefs;
  std::vector<int> subset;
  Eigen::VectorXd x_center;  // stored centering means (may be empty)
  double y_center = 0.0;
};

PwcModel fit_pwc(const SegmentFeatures& feats, const Eigen::VectorXd& y);

Eigen::VectorXd predict(const PwcModel& model, const SegmentFeatures& feats);

/// Per-segment cubic B-spline expansion with a shared second-order
/// roughness penalty; lambda picked by generalized cross validation.
struct PsplineModel {
  struct SegmentFit {
    std::vector<int> points;  // member grid indices (sums run over these only)
    double lo = 0.0, hi = 0.0;
    int n_interior = 0;
    Eigen::VectorXd coefs;       // spline coefficients; 1-vector when constant
    bool constant_fallback = false;  // span too short for a cubic basis
  };
  double intercept = 0.0;
  std::vector<SegmentFit> segments;
  std::vector<int> subset;  // original segment indices, parallel to segments
  double lambda = 0.0;
  int penalty_order = 2;
  std::vector<double> lambda_grid;
  std::vector<double> gcv_path;
  Eigen::VectorXd x_center;
  double y_center = 0.0;
};

/// 30 log-spaced values in [1e-6, 1e4].
std::vector<double> default_lambda_grid();

PsplineModel fit_pspline(const Dataset1D& data, const Segments& segments,
                         const std::vector<int>& subset,
                         std::span<const double> lambda_grid = {});

Eigen::VectorXd predict(const PsplineModel& model, const Dataset1D& data);

/// Fitted coefficient function sampled on the grid; exactly zero off the
/// model's segment points.
Eigen::VectorXd beta_curve(const PsplineModel& model, const Grid1D& grid);

/// Column blocks of the spline design shared between the selection CV
/// engine and fit_pspline. Column j of block l is the Riemann inner product
/// of each sample with basis function j of segment l.
struct SplineDesign {
  std::vector<Eigen::MatrixXd> blocks;     // n x b_l per segment
  std::vector<Eigen::MatrixXd> penalties;  // b_l x b_l (zero for fallback)
  std::vector<PsplineModel::SegmentFit> meta;
};

SplineDesign build_spline_design(const Eigen::MatrixXd& X, const Grid1D& grid,
                                 const Segments& segments);

/// Eigen-path solver for (A + lambda*P) c = b built once per design: yields
/// effective dof, RSS and coefficients for any lambda at O(basis) cost.
class RidgePath {
 public:
  RidgePath(const Eigen::MatrixXd& A, const Eigen::MatrixXd& P, const Eigen::VectorXd& b,
            double yty, int n_rows);

  double edf(double lambda) const;
  double rss(double lambda) const;
  /// Craven-Wahba: n * RSS / (n - edf)^2; +inf where edf >= n.
  double gcv(double lambda) const;
  Eigen::VectorXd coefs(double lambda) const;

 private:
  Eigen::MatrixXd r_inv_u_;
  Eigen::VectorXd d_, w_;
  double yty_;
  int n_;
};

}  // namespace fudos
